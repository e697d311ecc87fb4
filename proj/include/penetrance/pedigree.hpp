#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace penetrance {

enum class Sex { kMale, kFemale };

// Covariate coding: 1 = male, 0 = female.
inline int sex_covariate(Sex s) { return s == Sex::kMale ? 1 : 0; }

// Observed time-to-event pair. cause 0 means censored, cause k >= 1 means
// event of type k occurred first, at the recorded age.
struct PhenotypeRecord {
  double age = 0.0;  // years, raw input scale
  int cause = 0;
};

struct Individual {
  std::string id;
  std::string family_id;
  std::string father_id;  // empty = founder
  std::string mother_id;  // empty = founder
  Sex sex = Sex::kFemale;
  std::optional<int> genotype;  // observed carrier status 0/1; nullopt = missing
  PhenotypeRecord phenotype;
  bool proband = false;
  bool counselee = false;
};

struct Couple {
  int father = -1;
  int mother = -1;
  std::vector<int> children;
};

struct Violation {
  std::string family_id;
  std::string code;  // e.g. "missing_parent", "loop", "disconnected"
  std::string detail;
};

// Loop-free connected family graph, immutable after construction. Building
// validates all structural invariants and precomputes the nuclear-family
// structure and a topological order used by the peeling engine.
class Pedigree {
 public:
  static Pedigree build(std::vector<Individual> members);

  const std::string& family_id() const { return family_id_; }
  int size() const { return static_cast<int>(members_.size()); }
  std::span<const Individual> members() const { return members_; }
  const Individual& member(int j) const { return members_[j]; }
  int proband() const { return proband_; }
  std::optional<int> index_of(const std::string& id) const;

  int parent_couple(int j) const { return parent_couple_[j]; }
  bool is_founder(int j) const { return parent_couple_[j] < 0; }
  int founder_count() const;
  std::span<const int> marriages(int j) const { return marriages_[j]; }
  const Couple& couple(int c) const { return couples_[c]; }
  int couple_count() const { return static_cast<int>(couples_.size()); }
  // Parents before children.
  std::span<const int> topological_order() const { return topo_; }

 private:
  Pedigree() = default;

  std::string family_id_;
  std::vector<Individual> members_;
  std::vector<Couple> couples_;
  std::vector<int> parent_couple_;
  std::vector<std::vector<int>> marriages_;
  std::vector<int> topo_;
  int proband_ = -1;
};

// Non-throwing invariant check over a candidate member list; empty result
// iff Pedigree::build would succeed.
std::vector<Violation> validate_members(std::span<const Individual> members);
std::vector<Violation> validate(const Pedigree& p);

// Pedigree file format: delimited text (tab or comma, sniffed from the
// header), header row naming the columns family_id, individual_id,
// father_id, mother_id, sex, genotype, age, cause, proband and optionally
// counselee. Throws DataError with family id and row number on malformed
// input or invariant violations.
std::vector<Pedigree> load_pedigrees(std::istream& in);
std::vector<Pedigree> load_pedigree_file(const std::string& path);
void save_pedigrees(std::ostream& out, std::span<const Pedigree> pedigrees,
                    char delim = '\t');
void save_pedigree_file(const std::string& path,
                        std::span<const Pedigree> pedigrees, char delim = '\t');

// Members connected to the pivot only through its parents (anterior) vs only
// through its spouses/offspring (posterior). Disjoint; union plus the pivot
// covers the whole pedigree. Indices sorted ascending.
struct Partition {
  std::vector<int> anterior;
  std::vector<int> posterior;
};
Partition anterior_posterior_partition(const Pedigree& p, int pivot);

}  // namespace penetrance
