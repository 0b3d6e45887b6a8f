#include "alfa/formula.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "alfa/error.hpp"
#include "alfa/rng.hpp"

namespace alfa {

Literal Literal::from_dimacs(int value) {
  if (value == 0) throw ConfigError("literal 0 is not a variable");
  const Var v = static_cast<Var>(std::abs(value)) - 1;
  return Literal(v, value > 0);
}

std::optional<Clause> Clause::normalize(std::vector<Literal> literals) {
  if (literals.empty()) return std::nullopt;
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()), literals.end());
  for (std::size_t i = 1; i < literals.size(); ++i)
    if (literals[i].var() == literals[i - 1].var()) return std::nullopt;
  return Clause(std::move(literals));
}

Clause Clause::make(std::vector<Literal> literals) {
  if (literals.empty()) throw ConfigError("empty clause");
  auto c = normalize(std::move(literals));
  if (!c) throw ConfigError("tautological clause");
  return std::move(*c);
}

Clause Clause::from_dimacs(std::initializer_list<int> literals) {
  std::vector<Literal> lits;
  for (int v : literals) lits.push_back(Literal::from_dimacs(v));
  return make(std::move(lits));
}

bool Clause::contains(Literal l) const {
  return std::binary_search(literals_.begin(), literals_.end(), l);
}

std::size_t ClauseHash::operator()(const Clause& c) const noexcept {
  std::uint64_t h = 0x51ed270b27e3c1a9ULL ^ c.width();
  for (Literal l : c) h = mix64(h ^ l.code());
  return static_cast<std::size_t>(h);
}

Formula::Formula(std::size_t num_vars, std::vector<Clause> clauses)
    : num_vars_(num_vars) {
  rehash(std::max<std::size_t>(16, clauses.size() * 2));
  clauses_.reserve(clauses.size());
  for (auto& c : clauses) add(std::move(c));
}

void Formula::rehash(std::size_t capacity) {
  std::size_t cap = 16;
  while (cap < capacity) cap <<= 1;
  buckets_.assign(cap, 0);
  for (std::size_t i = 0; i < clauses_.size(); ++i)
    buckets_[find_slot(clauses_[i])] = i + 1;
}

std::size_t Formula::find_slot(const Clause& c) const {
  const std::size_t mask = buckets_.size() - 1;
  std::size_t slot = ClauseHash{}(c) & mask;
  while (buckets_[slot] != 0 && !(clauses_[buckets_[slot] - 1] == c))
    slot = (slot + 1) & mask;
  return slot;
}

bool Formula::contains(const Clause& c) const {
  if (buckets_.empty()) return false;
  return buckets_[find_slot(c)] != 0;
}

bool Formula::add(Clause clause) {
  if (clause.width() == 0) throw ConfigError("empty clause");
  if (clause.max_var() >= num_vars_)
    throw ConfigError("literal " + std::to_string(clause.max_var() + 1) +
                      " exceeds declared variable count " +
                      std::to_string(num_vars_));
  if (buckets_.empty() || (clauses_.size() + 1) * 2 > buckets_.size())
    rehash((clauses_.size() + 1) * 4);
  const std::size_t slot = find_slot(clause);
  if (buckets_[slot] != 0) return false;
  clauses_.push_back(std::move(clause));
  buckets_[slot] = clauses_.size();
  return true;
}

bool clause_satisfied(const Clause& c, const Assignment& a) {
  return std::any_of(c.begin(), c.end(),
                     [&](Literal l) { return a.satisfies(l); });
}

std::vector<std::size_t> unsat_clauses(const Formula& f, const Assignment& a) {
  if (a.size() != f.num_vars())
    throw ConfigError("assignment length " + std::to_string(a.size()) +
                      " does not match variable count " +
                      std::to_string(f.num_vars()));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!clause_satisfied(f[i], a)) out.push_back(i);
  return out;
}

bool satisfies(const Formula& f, const Assignment& a) {
  return unsat_clauses(f, a).empty();
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw ConfigError("dimacs line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Formula parse_dimacs(std::istream& in, std::vector<std::string>* warnings) {
  std::optional<Formula> f;
  std::size_t declared = 0;
  std::size_t read_clauses = 0;
  std::vector<Literal> pending;
  std::size_t pending_line = 0;
  std::string line;
  std::size_t lineno = 0;
  bool done = false;

  while (!done && std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const char lead = line[first];
    if (lead == 'c') continue;
    if (lead == '%') break;
    if (lead == 'p') {
      if (f) parse_fail(lineno, "duplicate header");
      std::istringstream iss(line.substr(first));
      std::string p, fmt, extra;
      long long n = -1, m = -1;
      if (!(iss >> p >> fmt >> n >> m) || p != "p" || fmt != "cnf" || n < 1 ||
          m < 0 || (iss >> extra))
        parse_fail(lineno, "malformed header '" + line + "'");
      f.emplace(static_cast<std::size_t>(n));
      declared = static_cast<std::size_t>(m);
      continue;
    }
    if (!f) parse_fail(lineno, "clause before header");
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) {
      char* end = nullptr;
      const long long v = std::strtoll(tok.c_str(), &end, 10);
      if (*end != '\0') parse_fail(lineno, "bad token '" + tok + "'");
      if (v == 0) {
        if (pending.empty()) parse_fail(lineno, "empty clause");
        auto c = Clause::normalize(pending);
        if (!c) parse_fail(pending_line, "tautological clause");
        f->add(std::move(*c));
        ++read_clauses;
        pending.clear();
        continue;
      }
      if (static_cast<unsigned long long>(std::llabs(v)) > f->num_vars())
        parse_fail(lineno, "literal " + tok + " out of range 1.." +
                               std::to_string(f->num_vars()));
      if (pending.empty()) pending_line = lineno;
      pending.push_back(Literal::from_dimacs(static_cast<int>(v)));
    }
  }
  if (!f) throw ConfigError("dimacs: missing 'p cnf' header");
  if (!pending.empty()) parse_fail(pending_line, "clause not terminated by 0");
  if (warnings) {
    if (read_clauses != declared)
      warnings->push_back("header declares " + std::to_string(declared) +
                          " clauses, read " + std::to_string(read_clauses));
    if (f->size() != read_clauses)
      warnings->push_back(std::to_string(read_clauses - f->size()) +
                          " duplicate clauses merged");
  }
  return std::move(*f);
}

Formula parse_dimacs(std::string_view text, std::vector<std::string>* warnings) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in, warnings);
}

Formula read_dimacs_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_dimacs(in, warnings);
}

void emit_dimacs(const Formula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars() << ' ' << f.size() << '\n';
  for (const auto& c : f.clauses()) {
    for (Literal l : c) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
}

std::string emit_dimacs(const Formula& f) {
  std::ostringstream out;
  emit_dimacs(f, out);
  return out.str();
}

void write_dimacs_file(const Formula& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  emit_dimacs(f, out);
  if (!out) throw IoError("write failed for " + path);
}

std::string model_line(const Assignment& a) {
  std::string s = "v";
  for (Var v = 0; v < a.size(); ++v) {
    s += ' ';
    if (!a[v]) s += '-';
    s += std::to_string(v + 1);
  }
  s += " 0";
  return s;
}

}  // namespace alfa
