#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alfa {

using Var = std::uint32_t;  // 0-based internally

// A literal packed as 2*var + polarity. Sorting by code orders literals by
// variable, negative before positive.
class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(Var var, bool positive)
      : code_(2 * var + (positive ? 1u : 0u)) {}

  static constexpr Literal from_code(std::uint32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }
  // DIMACS integer (non-zero, 1-based) to literal.
  static Literal from_dimacs(int value);

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool positive() const { return (code_ & 1u) != 0; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr Literal operator~() const { return from_code(code_ ^ 1u); }
  int to_dimacs() const {
    const int v = static_cast<int>(var()) + 1;
    return positive() ? v : -v;
  }

  constexpr auto operator<=>(const Literal&) const = default;

 private:
  std::uint32_t code_ = 0;
};

// A non-empty, duplicate-free, non-tautological set of literals stored in
// canonical (ascending code) order.
class Clause {
 public:
  Clause() = default;

  // Sorts and merges duplicates. Returns nullopt for tautologies and for an
  // empty literal list.
  static std::optional<Clause> normalize(std::vector<Literal> literals);
  // Same as normalize but throws ConfigError on tautology or emptiness.
  static Clause make(std::vector<Literal> literals);
  static Clause from_dimacs(std::initializer_list<int> literals);
  // Caller guarantees the literals are already canonical.
  static Clause from_sorted(std::vector<Literal> literals) {
    return Clause(std::move(literals));
  }

  std::span<const Literal> literals() const { return literals_; }
  std::size_t width() const { return literals_.size(); }
  const Literal& operator[](std::size_t i) const { return literals_[i]; }
  auto begin() const { return literals_.begin(); }
  auto end() const { return literals_.end(); }
  bool contains(Literal l) const;
  Var max_var() const { return literals_.back().var(); }

  bool operator==(const Clause&) const = default;
  auto operator<=>(const Clause&) const = default;

 private:
  explicit Clause(std::vector<Literal> sorted) : literals_(std::move(sorted)) {}
  std::vector<Literal> literals_;
};

struct ClauseHash {
  std::size_t operator()(const Clause& c) const noexcept;
};

class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t num_vars, bool value = false)
      : values_(num_vars, value ? 1 : 0) {}
  explicit Assignment(std::vector<std::uint8_t> values)
      : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool operator[](Var v) const { return values_[v] != 0; }
  void set(Var v, bool value) { values_[v] = value ? 1 : 0; }
  void flip(Var v) { values_[v] ^= 1; }
  bool satisfies(Literal l) const { return (values_[l.var()] != 0) == l.positive(); }
  std::span<const std::uint8_t> values() const { return values_; }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<std::uint8_t> values_;
};

// Clause set over num_vars variables. Clauses are kept in insertion order
// with exact duplicates dropped.
class Formula {
 public:
  Formula() = default;
  explicit Formula(std::size_t num_vars) : num_vars_(num_vars) {}
  Formula(std::size_t num_vars, std::vector<Clause> clauses);

  // Returns false (and leaves the formula unchanged) if the clause is
  // already present. Throws ConfigError if a variable exceeds num_vars.
  bool add(Clause clause);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t size() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& operator[](std::size_t i) const { return clauses_[i]; }
  bool contains(const Clause& c) const;

  bool operator==(const Formula& other) const {
    return num_vars_ == other.num_vars_ && clauses_ == other.clauses_;
  }

 private:
  std::size_t num_vars_ = 0;
  std::vector<Clause> clauses_;
  std::vector<std::size_t> buckets_;  // open-addressing index into clauses_
  void rehash(std::size_t capacity);
  std::size_t find_slot(const Clause& c) const;
};

bool clause_satisfied(const Clause& c, const Assignment& a);

// Indices of clauses with no true literal under a.
std::vector<std::size_t> unsat_clauses(const Formula& f, const Assignment& a);

bool satisfies(const Formula& f, const Assignment& a);

// DIMACS CNF. Warnings (such as a clause count that differs from the header)
// are appended to `warnings` when non-null.
Formula parse_dimacs(std::istream& in, std::vector<std::string>* warnings = nullptr);
Formula parse_dimacs(std::string_view text, std::vector<std::string>* warnings = nullptr);
Formula read_dimacs_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

void emit_dimacs(const Formula& f, std::ostream& out);
std::string emit_dimacs(const Formula& f);
void write_dimacs_file(const Formula& f, const std::string& path);

// "v 1 -2 ... 0" model line.
std::string model_line(const Assignment& a);

}  // namespace alfa
