#pragma once

#include <string>
#include <vector>

#include "forel/game.hpp"

namespace forel {

// Closed enumeration; adding a kind means extending every switch below,
// which the compiler enforces.
enum class RegularizerKind { kEntropic, kEuclidean };

RegularizerKind RegularizerKindFromName(const std::string& name);
std::string RegularizerKindName(RegularizerKind kind);

struct StrongConvexity {
  double constant = 1.0;
  std::string norm;  // "l2" or "l1"
};

// A strictly convex penalty on the n-simplex together with its convex
// conjugate and the induced choice map.
class Regularizer {
 public:
  Regularizer(RegularizerKind kind, int n);

  RegularizerKind kind() const { return kind_; }
  int n() const { return n_; }

  // Penalty value at a simplex point. Entropic sum x log x with
  // 0 log 0 = 0; Euclidean 0.5 * sum x^2. Throws std::domain_error if x
  // is off the simplex beyond 1e-9.
  double Value(const Vec& x) const;

  // argmax_x { <y, x> - h(x) } over the simplex. Entropic: softmax with
  // max subtraction (cumulative scores grow linearly in t and would
  // overflow a naive exp). Euclidean: sort-and-threshold projection.
  Vec ChoiceMap(const Vec& y) const;

  // h*(y) = <y, Q(y)> - h(Q(y)). Entropic uses max-shifted log-sum-exp.
  double Conjugate(const Vec& y) const;

  // max h - min h over the simplex.
  double Omega() const;

  StrongConvexity StrongConvexityConstant() const;

 private:
  RegularizerKind kind_;
  int n_;
};

// Euclidean projection of an arbitrary vector onto the simplex
// (sort-and-threshold, O(n log n)).
Vec ProjectToSimplex(const Vec& y);

// Max-shifted log-sum-exp.
double LogSumExp(const Vec& y);

}  // namespace forel
