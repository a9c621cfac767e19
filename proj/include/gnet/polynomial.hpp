#pragma once

// Small sparse multivariate polynomials over profile coordinates. Exponents
// stay tiny (state monomials are multilinear; clearing one denominator adds a
// single extra power), so terms hold a sorted (var, exp) list. Evaluation is
// templated on the scalar so the same expression drives the real and complex
// trackers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace gnet {

struct Monomial {
  std::vector<std::pair<int, int>> pw;  // sorted by var, exp >= 1

  bool operator==(const Monomial& o) const { return pw == o.pw; }
  bool operator<(const Monomial& o) const { return pw < o.pw; }
  int degree() const {
    int d = 0;
    for (auto& [v, e] : pw) d += e;
    return d;
  }
};

class Poly {
 public:
  struct Term {
    double c;
    Monomial m;
  };

  Poly() = default;
  static Poly constant(double c) {
    Poly p;
    if (c != 0.0) p.terms_.push_back({c, {}});
    return p;
  }
  static Poly variable(int v) {
    Poly p;
    p.terms_.push_back({1.0, {{{v, 1}}}});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero(double tol = 0.0) const {
    for (auto& t : terms_)
      if (std::abs(t.c) > tol) return false;
    return true;
  }
  int total_degree() const {
    int d = 0;
    for (auto& t : terms_) d = std::max(d, t.m.degree());
    return d;
  }
  int num_terms() const { return static_cast<int>(terms_.size()); }

  Poly& operator+=(const Poly& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (auto t : o.terms_) {
      t.c = -t.c;
      terms_.push_back(t);
    }
    normalize();
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        Term t;
        t.c = ta.c * tb.c;
        t.m = mul(ta.m, tb.m);
        out.terms_.push_back(std::move(t));
      }
    out.normalize();
    return out;
  }
  friend Poly operator*(Poly a, double s) {
    for (auto& t : a.terms_) t.c *= s;
    a.normalize();
    return a;
  }
  friend Poly operator*(double s, Poly a) { return std::move(a) * s; }

  // Adds c * prod(vars) without normalizing; call finish() once afterwards.
  // This is how state sums are accumulated cheaply.
  void add_product_term(double c, std::vector<int> vars) {
    std::sort(vars.begin(), vars.end());
    Term t;
    t.c = c;
    for (size_t i = 0; i < vars.size();) {
      size_t j = i;
      while (j < vars.size() && vars[j] == vars[i]) ++j;
      t.m.pw.push_back({vars[i], static_cast<int>(j - i)});
      i = j;
    }
    terms_.push_back(std::move(t));
  }
  void finish() { normalize(); }

  template <typename Scalar>
  Scalar eval(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) const {
    Scalar acc = Scalar(0);
    for (const auto& t : terms_) {
      Scalar v = Scalar(t.c);
      for (auto& [var, exp] : t.m.pw)
        for (int e = 0; e < exp; ++e) v *= x[var];
      acc += v;
    }
    return acc;
  }

  Poly derivative(int var) const {
    Poly out;
    for (const auto& t : terms_) {
      for (size_t i = 0; i < t.m.pw.size(); ++i) {
        if (t.m.pw[i].first != var) continue;
        Term d;
        d.c = t.c * t.m.pw[i].second;
        d.m = t.m;
        if (--d.m.pw[i].second == 0) d.m.pw.erase(d.m.pw.begin() + i);
        out.terms_.push_back(std::move(d));
        break;
      }
    }
    out.normalize();
    return out;
  }

  // Replaces `var` with the polynomial `repl` (handles any exponent by
  // repeated multiplication; exponents here never exceed 2).
  Poly substitute(int var, const Poly& repl) const {
    Poly out;
    for (const auto& t : terms_) {
      int exp = 0;
      Monomial rest;
      for (auto& [v, e] : t.m.pw) {
        if (v == var)
          exp = e;
        else
          rest.pw.push_back({v, e});
      }
      Poly piece;
      piece.terms_.push_back({t.c, rest});
      for (int e = 0; e < exp; ++e) piece = piece * repl;
      out.terms_.insert(out.terms_.end(), piece.terms_.begin(), piece.terms_.end());
    }
    out.normalize();
    return out;
  }

  // Evaluates some variables to constants, keeping the rest symbolic.
  // `values[v]` applies where `mask[v]` is true.
  Poly partial_eval(const std::vector<char>& mask,
                    const Eigen::VectorXd& values) const {
    Poly out;
    for (const auto& t : terms_) {
      Term nt;
      nt.c = t.c;
      for (auto& [v, e] : t.m.pw) {
        if (mask[v])
          for (int i = 0; i < e; ++i) nt.c *= values[v];
        else
          nt.m.pw.push_back({v, e});
      }
      out.terms_.push_back(std::move(nt));
    }
    out.normalize();
    return out;
  }

  // Renames variables; map[v] must be >= 0 for every variable present.
  Poly remap(const std::vector<int>& map) const {
    Poly out;
    for (const auto& t : terms_) {
      Term nt;
      nt.c = t.c;
      for (auto& [v, e] : t.m.pw) nt.m.pw.push_back({map[v], e});
      std::sort(nt.m.pw.begin(), nt.m.pw.end());
      out.terms_.push_back(std::move(nt));
    }
    out.normalize();
    return out;
  }

 private:
  static Monomial mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    size_t i = 0, j = 0;
    while (i < a.pw.size() || j < b.pw.size()) {
      if (j == b.pw.size() || (i < a.pw.size() && a.pw[i].first < b.pw[j].first))
        out.pw.push_back(a.pw[i++]);
      else if (i == a.pw.size() || b.pw[j].first < a.pw[i].first)
        out.pw.push_back(b.pw[j++]);
      else {
        out.pw.push_back({a.pw[i].first, a.pw[i].second + b.pw[j].second});
        ++i, ++j;
      }
    }
    return out;
  }

  void normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.m < b.m; });
    std::vector<Term> merged;
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().m == t.m)
        merged.back().c += t.c;
      else
        merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.c == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
  }

  std::vector<Term> terms_;
};

}  // namespace gnet
