#include "penetrance/pedigree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "penetrance/common.hpp"

namespace penetrance {

namespace {

struct Structure {
  std::vector<Couple> couples;
  std::vector<int> parent_couple;
  std::vector<std::vector<int>> marriages;
};

// Groups members into nuclear-family couples. Assumes parent ids resolve.
Structure build_structure(std::span<const Individual> members,
                          const std::unordered_map<std::string, int>& index) {
  Structure s;
  s.parent_couple.assign(members.size(), -1);
  s.marriages.assign(members.size(), {});
  std::map<std::pair<int, int>, int> couple_index;
  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    const Individual& m = members[j];
    if (m.father_id.empty()) continue;
    const int f = index.at(m.father_id);
    const int mo = index.at(m.mother_id);
    auto key = std::make_pair(f, mo);
    auto it = couple_index.find(key);
    if (it == couple_index.end()) {
      it = couple_index.emplace(key, static_cast<int>(s.couples.size())).first;
      s.couples.push_back(Couple{f, mo, {}});
      s.marriages[f].push_back(it->second);
      s.marriages[mo].push_back(it->second);
    }
    s.couples[it->second].children.push_back(j);
    s.parent_couple[j] = it->second;
  }
  return s;
}

// Union-find over individual and couple nodes; detects any cycle in the
// marriage node graph and counts connected components.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // Returns false if x and y were already connected (a cycle).
  bool unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    parent[rx] = ry;
    return true;
  }
};

std::string member_label(const Individual& m) {
  return "member '" + m.id + "'";
}

}  // namespace

std::vector<Violation> validate_members(std::span<const Individual> members) {
  std::vector<Violation> out;
  if (members.empty()) {
    out.push_back({"", "empty_family", "family has no members"});
    return out;
  }
  const std::string& fam = members[0].family_id;
  auto add = [&](const std::string& code, const std::string& detail) {
    out.push_back({fam, code, detail});
  };

  std::unordered_map<std::string, int> index;
  for (int j = 0; j < static_cast<int>(members.size()); ++j) {
    const Individual& m = members[j];
    if (m.id.empty()) add("bad_id", "empty individual id");
    if (!index.emplace(m.id, j).second) {
      add("duplicate_id", "duplicate id '" + m.id + "'");
    }
    if (m.family_id != fam) {
      add("family_mismatch", member_label(m) + " has family '" + m.family_id + "'");
    }
  }
  if (!out.empty()) return out;

  int probands = 0;
  bool parents_ok = true;
  for (const Individual& m : members) {
    if (m.proband) ++probands;
    if (m.phenotype.age < 0.0 || !std::isfinite(m.phenotype.age)) {
      add("bad_age", member_label(m) + " has invalid age");
    }
    if (m.phenotype.cause < 0) {
      add("bad_cause", member_label(m) + " has negative cause code");
    }
    if (m.genotype && *m.genotype != 0 && *m.genotype != 1) {
      add("bad_genotype", member_label(m) + " has genotype outside {0,1}");
    }
    if (m.father_id.empty() != m.mother_id.empty()) {
      add("single_parent",
          member_label(m) + " has exactly one parent recorded");
      parents_ok = false;
      continue;
    }
    if (m.father_id.empty()) continue;
    auto fit = index.find(m.father_id);
    auto mit = index.find(m.mother_id);
    if (fit == index.end()) {
      add("missing_parent",
          member_label(m) + " references unknown father '" + m.father_id + "'");
      parents_ok = false;
    }
    if (mit == index.end()) {
      add("missing_parent",
          member_label(m) + " references unknown mother '" + m.mother_id + "'");
      parents_ok = false;
    }
    if (fit != index.end() && mit != index.end() && fit->second == mit->second) {
      add("same_parent", member_label(m) + " lists one person as both parents");
      parents_ok = false;
    }
    if (fit != index.end() && members[fit->second].sex != Sex::kMale) {
      add("parent_sex", "father '" + m.father_id + "' is not male");
    }
    if (mit != index.end() && members[mit->second].sex != Sex::kFemale) {
      add("parent_sex", "mother '" + m.mother_id + "' is not female");
    }
  }
  if (probands != 1) {
    add("proband_count",
        "family has " + std::to_string(probands) + " probands, expected 1");
  }
  if (!parents_ok) return out;

  const Structure s = build_structure(members, index);
  const int n = static_cast<int>(members.size());
  const int nc = static_cast<int>(s.couples.size());
  UnionFind uf(n + nc);
  bool loop = false;
  for (int c = 0; c < nc; ++c) {
    if (!uf.unite(s.couples[c].father, n + c)) loop = true;
    if (!uf.unite(s.couples[c].mother, n + c)) loop = true;
    for (int child : s.couples[c].children) {
      if (!uf.unite(child, n + c)) loop = true;
    }
  }
  if (loop) {
    add("loop", "marriage graph contains a loop");
  }
  // Distinct roots over individual nodes only; couple nodes can hold roots.
  std::vector<int> roots;
  for (int j = 0; j < n; ++j) roots.push_back(uf.find(j));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  const int components = static_cast<int>(roots.size());
  if (components > 1) {
    add("disconnected", "pedigree splits into " +
                            std::to_string(components) + " components");
  }
  return out;
}

std::vector<Violation> validate(const Pedigree& p) {
  return validate_members(p.members());
}

Pedigree Pedigree::build(std::vector<Individual> members) {
  auto violations = validate_members(members);
  if (!violations.empty()) {
    std::string msg = "invalid pedigree";
    for (const auto& v : violations) {
      msg += "\n  [" + v.family_id + "] " + v.code + ": " + v.detail;
    }
    throw DataError(msg);
  }
  Pedigree p;
  p.family_id_ = members[0].family_id;
  p.members_ = std::move(members);

  std::unordered_map<std::string, int> index;
  for (int j = 0; j < p.size(); ++j) index.emplace(p.members_[j].id, j);
  Structure s = build_structure(p.members_, index);
  p.couples_ = std::move(s.couples);
  p.parent_couple_ = std::move(s.parent_couple);
  p.marriages_ = std::move(s.marriages);

  for (int j = 0; j < p.size(); ++j) {
    if (p.members_[j].proband) p.proband_ = j;
  }

  // Kahn's algorithm; cycle-free is already guaranteed.
  std::vector<int> indeg(p.size(), 0);
  for (int j = 0; j < p.size(); ++j) {
    if (p.parent_couple_[j] >= 0) indeg[j] = 2;
  }
  std::deque<int> ready;
  for (int j = 0; j < p.size(); ++j) {
    if (indeg[j] == 0) ready.push_back(j);
  }
  while (!ready.empty()) {
    const int j = ready.front();
    ready.pop_front();
    p.topo_.push_back(j);
    for (int c : p.marriages_[j]) {
      for (int child : p.couples_[c].children) {
        if (--indeg[child] == 0) ready.push_back(child);
      }
    }
  }
  return p;
}

std::optional<int> Pedigree::index_of(const std::string& id) const {
  for (int j = 0; j < size(); ++j) {
    if (members_[j].id == id) return j;
  }
  return std::nullopt;
}

int Pedigree::founder_count() const {
  int n = 0;
  for (int j = 0; j < size(); ++j) {
    if (is_founder(j)) ++n;
  }
  return n;
}

namespace {

struct ColumnMap {
  int family = -1, id = -1, father = -1, mother = -1, sex = -1, genotype = -1,
      age = -1, cause = -1, proband = -1, counselee = -1;
};

double parse_double(const std::string& s, int row, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, int row, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

bool is_na(const std::string& s) { return s.empty() || s == "NA" || s == "."; }

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::vector<Pedigree> load_pedigrees(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty pedigree file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

  ColumnMap cols;
  const auto names = split(header, delim);
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    const std::string name = trim(names[i]);
    if (name == "family_id") cols.family = i;
    else if (name == "individual_id") cols.id = i;
    else if (name == "father_id") cols.father = i;
    else if (name == "mother_id") cols.mother = i;
    else if (name == "sex") cols.sex = i;
    else if (name == "genotype") cols.genotype = i;
    else if (name == "age") cols.age = i;
    else if (name == "cause") cols.cause = i;
    else if (name == "proband") cols.proband = i;
    else if (name == "counselee") cols.counselee = i;
  }
  for (int c : {cols.family, cols.id, cols.father, cols.mother, cols.sex,
                cols.genotype, cols.age, cols.cause, cols.proband}) {
    if (c < 0) {
      throw DataError(
          "pedigree header must name family_id, individual_id, father_id, "
          "mother_id, sex, genotype, age, cause, proband");
    }
  }

  std::vector<std::string> family_order;
  std::map<std::string, std::vector<Individual>> families;
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, delim);
    auto get = [&](int c) -> std::string {
      if (c < 0 || c >= static_cast<int>(fields.size())) {
        throw DataError("row " + std::to_string(row) + ": too few columns");
      }
      return trim(fields[c]);
    };
    Individual m;
    m.family_id = get(cols.family);
    m.id = get(cols.id);
    m.father_id = is_na(get(cols.father)) ? "" : get(cols.father);
    m.mother_id = is_na(get(cols.mother)) ? "" : get(cols.mother);
    const std::string sex = get(cols.sex);
    if (sex == "M" || sex == "m" || sex == "1") {
      m.sex = Sex::kMale;
    } else if (sex == "F" || sex == "f" || sex == "0") {
      m.sex = Sex::kFemale;
    } else {
      throw DataError("family " + m.family_id + ", row " + std::to_string(row) +
                      ": bad sex '" + sex + "'");
    }
    const std::string gt = get(cols.genotype);
    if (!is_na(gt)) {
      const int g = parse_int(gt, row, "genotype");
      if (g != 0 && g != 1) {
        throw DataError("family " + m.family_id + ", row " +
                        std::to_string(row) + ": genotype must be 0, 1 or NA");
      }
      m.genotype = g;
    }
    m.phenotype.age = parse_double(get(cols.age), row, "age");
    m.phenotype.cause = parse_int(get(cols.cause), row, "cause");
    m.proband = parse_int(get(cols.proband), row, "proband") != 0;
    if (cols.counselee >= 0 && cols.counselee < static_cast<int>(fields.size())) {
      const std::string c = trim(fields[cols.counselee]);
      if (!is_na(c)) m.counselee = parse_int(c, row, "counselee") != 0;
    }
    if (families.find(m.family_id) == families.end()) {
      family_order.push_back(m.family_id);
    }
    families[m.family_id].push_back(std::move(m));
  }
  if (family_order.empty()) throw DataError("pedigree file has no data rows");

  std::vector<Violation> violations;
  std::vector<Pedigree> out;
  for (const std::string& fam : family_order) {
    auto v = validate_members(families[fam]);
    if (!v.empty()) {
      violations.insert(violations.end(), v.begin(), v.end());
      continue;
    }
    out.push_back(Pedigree::build(std::move(families[fam])));
  }
  if (!violations.empty()) {
    std::string msg = "pedigree validation failed";
    for (const auto& v : violations) {
      msg += "\n  [" + v.family_id + "] " + v.code + ": " + v.detail;
    }
    throw DataError(msg);
  }
  return out;
}

std::vector<Pedigree> load_pedigree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pedigree file: " + path);
  return load_pedigrees(in);
}

void save_pedigrees(std::ostream& out, std::span<const Pedigree> pedigrees,
                    char delim) {
  out << "family_id" << delim << "individual_id" << delim << "father_id"
      << delim << "mother_id" << delim << "sex" << delim << "genotype" << delim
      << "age" << delim << "cause" << delim << "proband" << delim
      << "counselee" << '\n';
  for (const Pedigree& p : pedigrees) {
    for (const Individual& m : p.members()) {
      out << m.family_id << delim << m.id << delim << m.father_id << delim
          << m.mother_id << delim << (m.sex == Sex::kMale ? 'M' : 'F') << delim;
      if (m.genotype) {
        out << *m.genotype;
      } else {
        out << "NA";
      }
      out << delim << format_double(m.phenotype.age) << delim
          << m.phenotype.cause << delim << (m.proband ? 1 : 0) << delim
          << (m.counselee ? 1 : 0) << '\n';
    }
  }
}

void save_pedigree_file(const std::string& path,
                        std::span<const Pedigree> pedigrees, char delim) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pedigree file: " + path);
  save_pedigrees(out, pedigrees, delim);
}

Partition anterior_posterior_partition(const Pedigree& p, int pivot) {
  if (pivot < 0 || pivot >= p.size()) {
    throw DataError("pivot index outside pedigree");
  }
  // BFS over the marriage node graph with the pivot removed. Couple nodes are
  // numbered after individuals.
  const int n = p.size();
  const int total = n + p.couple_count();
  auto neighbours = [&](int node, auto&& visit) {
    if (node < n) {
      if (p.parent_couple(node) >= 0) visit(n + p.parent_couple(node));
      for (int c : p.marriages(node)) visit(n + c);
    } else {
      const Couple& c = p.couple(node - n);
      visit(c.father);
      visit(c.mother);
      for (int child : c.children) visit(child);
    }
  };
  auto bfs = [&](std::vector<int> start, std::vector<char>& seen) {
    std::deque<int> q;
    for (int s : start) {
      if (s != pivot && !seen[s]) {
        seen[s] = 1;
        q.push_back(s);
      }
    }
    std::vector<int> reached;
    while (!q.empty()) {
      const int node = q.front();
      q.pop_front();
      if (node < n) reached.push_back(node);
      neighbours(node, [&](int next) {
        if (next == pivot || seen[next]) return;
        seen[next] = 1;
        q.push_back(next);
      });
    }
    return reached;
  };

  Partition part;
  std::vector<char> seen_a(total, 0);
  if (p.parent_couple(pivot) >= 0) {
    const Couple& pc = p.couple(p.parent_couple(pivot));
    part.anterior = bfs({pc.father, pc.mother}, seen_a);
  }
  std::vector<char> seen_b(total, 0);
  std::vector<int> start;
  for (int c : p.marriages(pivot)) start.push_back(n + c);
  part.posterior = bfs(start, seen_b);
  std::sort(part.anterior.begin(), part.anterior.end());
  std::sort(part.posterior.begin(), part.posterior.end());
  return part;
}

}  // namespace penetrance
