#include "iov/kpabe/lsss.hpp"

#include <algorithm>
#include <cctype>

namespace iov::kpabe {

AttributeUniverse::AttributeUniverse(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw InputError("duplicate attribute " + names_[i]);
  }
}

std::size_t AttributeUniverse::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownAttribute(name);
  return it->second;
}

bool Formula::evaluate(const AttributeSet& attrs) const {
  switch (kind) {
    case Kind::Leaf:
      return attrs.count(attribute) != 0;
    case Kind::And:
      return std::all_of(children.begin(), children.end(),
                         [&](const Formula& f) { return f.evaluate(attrs); });
    case Kind::Or:
      return std::any_of(children.begin(), children.end(),
                         [&](const Formula& f) { return f.evaluate(attrs); });
  }
  return false;
}

std::set<std::string> Formula::attributes() const {
  if (kind == Kind::Leaf) return {attribute};
  std::set<std::string> out;
  for (const auto& c : children) out.merge(c.attributes());
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) { tokenize(); }

  Formula parse() {
    if (tokens_.empty()) throw UnsupportedFormula("empty formula");
    Formula f = parse_or();
    if (pos_ != tokens_.size()) throw UnsupportedFormula("unexpected token '" + tokens_[pos_] + "'");
    return f;
  }

 private:
  static std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '.' ||
           c == '-';
  }

  void tokenize() {
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '(' || c == ')') {
        tokens_.emplace_back(1, c);
        ++i;
      } else if (ident_char(c)) {
        std::size_t j = i;
        while (j < text_.size() && ident_char(text_[j])) ++j;
        tokens_.push_back(text_.substr(i, j - i));
        i = j;
      } else {
        throw UnsupportedFormula(std::string("unsupported character '") + c + "'");
      }
    }
  }

  bool at_keyword(const char* kw) const {
    return pos_ < tokens_.size() && upper(tokens_[pos_]) == kw;
  }

  Formula parse_or() {
    Formula first = parse_and();
    if (!at_keyword("OR")) return first;
    Formula node{Formula::Kind::Or, {}, {std::move(first)}};
    while (at_keyword("OR")) {
      ++pos_;
      node.children.push_back(parse_and());
    }
    return node;
  }

  Formula parse_and() {
    Formula first = parse_primary();
    if (!at_keyword("AND")) return first;
    Formula node{Formula::Kind::And, {}, {std::move(first)}};
    while (at_keyword("AND")) {
      ++pos_;
      node.children.push_back(parse_primary());
    }
    return node;
  }

  Formula parse_primary() {
    if (pos_ >= tokens_.size()) throw UnsupportedFormula("formula ends early");
    const std::string& tok = tokens_[pos_];
    const std::string kw = upper(tok);
    if (kw == "NOT" || tok == "!") throw UnsupportedFormula("negation is not monotone");
    if (kw == "AND" || kw == "OR" || tok == ")") {
      throw UnsupportedFormula("unexpected '" + tok + "'");
    }
    ++pos_;
    if (tok == "(") {
      Formula inner = parse_or();
      if (pos_ >= tokens_.size() || tokens_[pos_] != ")") throw UnsupportedFormula("missing ')'");
      ++pos_;
      return inner;
    }
    return Formula{Formula::Kind::Leaf, tok, {}};
  }

  const std::string& text_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

struct Labeller {
  AccessStructure out;
  std::size_t counter = 1;

  void label(const Formula& f, std::vector<Scalar> vec) {
    switch (f.kind) {
      case Formula::Kind::Leaf:
        out.matrix.push_back(std::move(vec));
        out.rho.push_back(f.attribute);
        return;
      case Formula::Kind::Or:
        for (const auto& c : f.children) label(c, vec);
        return;
      case Formula::Kind::And: {
        // Fold n-ary AND as a left-deep chain of binary ANDs.
        std::vector<Scalar> carry = std::move(vec);
        for (std::size_t i = f.children.size() - 1; i > 0; --i) {
          ++counter;
          std::vector<Scalar> left = carry;
          left.resize(counter, Scalar(0));
          left[counter - 1] = Scalar(1);
          std::vector<Scalar> right(counter, Scalar(0));
          right[counter - 1] = Scalar(-1);
          label(f.children[i], std::move(right));
          carry = std::move(left);
        }
        label(f.children[0], std::move(carry));
        return;
      }
    }
  }
};

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).parse(); }

AccessStructure formula_to_lsss(const Formula& formula, const AttributeUniverse* universe) {
  if (universe && universe->size() > 0) {
    for (const auto& a : formula.attributes()) universe->index_of(a);
  }
  Labeller l;
  l.label(formula, {Scalar(1)});
  l.out.columns = l.counter;
  for (auto& row : l.out.matrix) row.resize(l.out.columns, Scalar(0));
  return std::move(l.out);
}

AccessStructure formula_to_lsss(const std::string& formula, const AttributeUniverse* universe) {
  return formula_to_lsss(parse_formula(formula), universe);
}

std::optional<std::vector<Scalar>> lsss_satisfy(const AccessStructure& access,
                                                const AttributeSet& attributes) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < access.rows(); ++i) {
    if (attributes.count(access.rho[i])) usable.push_back(i);
  }
  if (usable.empty() || access.columns == 0) return std::nullopt;

  // Solve sum_j w_j M_{I_j} = e_1, i.e. the n x |I| system M_I^T w = e_1.
  const std::size_t n = access.columns;
  const std::size_t m = usable.size();
  std::vector<std::vector<Scalar>> a(n, std::vector<Scalar>(m + 1, Scalar(0)));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) a[r][c] = access.matrix[usable[c]][r];
    a[r][m] = Scalar(r == 0 ? 1 : 0);
  }

  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < n; ++col) {
    std::size_t p = row;
    while (p < n && a[p][col].is_zero()) ++p;
    if (p == n) continue;
    std::swap(a[p], a[row]);
    const Scalar inv = a[row][col].inverse();
    for (auto& x : a[row]) x *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row || a[r][col].is_zero()) continue;
      const Scalar f = a[r][col];
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[row][c];
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < n; ++r) {
    if (!a[r][m].is_zero()) return std::nullopt;  // inconsistent
  }

  std::vector<Scalar> omega(access.rows(), Scalar(0));
  for (std::size_t r = 0; r < pivot_col.size(); ++r) omega[usable[pivot_col[r]]] = a[r][m];
  return omega;
}

std::vector<Scalar> share_secret(const AccessStructure& access, const std::vector<Scalar>& v) {
  if (v.size() != access.columns) throw InputError("masking vector length must equal columns");
  std::vector<Scalar> shares;
  shares.reserve(access.rows());
  for (const auto& row : access.matrix) {
    Scalar s(0);
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * v[j];
    shares.push_back(s);
  }
  return shares;
}

}  // namespace iov::kpabe
