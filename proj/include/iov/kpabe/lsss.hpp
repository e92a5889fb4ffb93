#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iov/error.hpp"
#include "iov/kpabe/field.hpp"

namespace iov::kpabe {

class UnsupportedFormula : public Error {
 public:
  using Error::Error;
};

class UnknownAttribute : public Error {
 public:
  explicit UnknownAttribute(const std::string& name)
      : Error("unknown attribute: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using AttributeSet = std::set<std::string>;

/// Declared attribute names; index i (0-based) corresponds to h_{i+1}.
class AttributeUniverse {
 public:
  AttributeUniverse() = default;
  explicit AttributeUniverse(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  /// Throws UnknownAttribute.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
};

/// Monotone boolean formula over attribute names.
struct Formula {
  enum class Kind { Leaf, And, Or };
  Kind kind = Kind::Leaf;
  std::string attribute;
  std::vector<Formula> children;

  bool evaluate(const AttributeSet& attributes) const;
  std::set<std::string> attributes() const;
};

/// Parses "A", "A AND B", "(A OR B) AND C". Operators are case-insensitive;
/// AND binds tighter than OR. NOT and any other operator raise UnsupportedFormula.
Formula parse_formula(const std::string& text);

/// LSSS access structure {M, rho}: M is l x n, row i labelled with rho[i].
struct AccessStructure {
  std::vector<std::vector<Scalar>> matrix;
  std::vector<std::string> rho;
  std::size_t columns = 0;

  std::size_t rows() const { return matrix.size(); }
};

/// Monotone formula to LSSS conversion; the shared secret is recovered
/// against target vector (1, 0, ..., 0). When `universe` is non-empty every
/// attribute must be declared in it.
AccessStructure formula_to_lsss(const Formula& formula, const AttributeUniverse* universe = nullptr);
AccessStructure formula_to_lsss(const std::string& formula,
                                const AttributeUniverse* universe = nullptr);

/// Coefficients w (one per row, zero outside I = {i : rho(i) in S}) with
/// sum_{i in I} w_i M_i = (1, 0, ..., 0), or nullopt when I does not span the target.
std::optional<std::vector<Scalar>> lsss_satisfy(const AccessStructure& access,
                                                const AttributeSet& attributes);

/// Shares lambda_i = v . M_i of the secret v[0].
std::vector<Scalar> share_secret(const AccessStructure& access, const std::vector<Scalar>& v);

}  // namespace iov::kpabe
