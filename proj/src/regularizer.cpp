#include "forel/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forel {

RegularizerKind RegularizerKindFromName(const std::string& name) {
  if (name == "entropic") return RegularizerKind::kEntropic;
  if (name == "euclidean") return RegularizerKind::kEuclidean;
  throw std::invalid_argument("unknown regularizer: " + name);
}

std::string RegularizerKindName(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kEntropic:
      return "entropic";
    case RegularizerKind::kEuclidean:
      return "euclidean";
  }
  throw std::logic_error("unreachable");
}

Regularizer::Regularizer(RegularizerKind kind, int n) : kind_(kind), n_(n) {
  if (n < 2) throw std::invalid_argument("regularizer needs n >= 2");
}

namespace {

void CheckSimplex(const Vec& x, int n) {
  if (static_cast<int>(x.size()) != n) {
    throw std::domain_error("point has wrong dimension");
  }
  double sum = 0.0;
  for (double p : x) {
    if (!std::isfinite(p) || p < -1e-9) {
      throw std::domain_error("point off the simplex");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw std::domain_error("point off the simplex");
  }
}

void CheckFinite(const Vec& y, int n) {
  if (static_cast<int>(y.size()) != n) {
    throw std::domain_error("score vector has wrong dimension");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::domain_error("non-finite score");
  }
}

}  // namespace

double LogSumExp(const Vec& y) {
  double m = y[0];
  for (double v : y) m = std::max(m, v);
  double s = 0.0;
  for (double v : y) s += std::exp(v - m);
  return m + std::log(s);
}

Vec ProjectToSimplex(const Vec& y) {
  Vec sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    double cand = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - cand > 0.0) theta = cand;
  }
  Vec x(y.size());
  for (size_t k = 0; k < y.size(); ++k) x[k] = std::max(y[k] - theta, 0.0);
  return x;
}

double Regularizer::Value(const Vec& x) const {
  CheckSimplex(x, n_);
  switch (kind_) {
    case RegularizerKind::kEntropic: {
      double s = 0.0;
      for (double p : x) {
        if (p > 0.0) s += p * std::log(p);
      }
      return s;
    }
    case RegularizerKind::kEuclidean: {
      double s = 0.0;
      for (double p : x) s += p * p;
      return 0.5 * s;
    }
  }
  throw std::logic_error("unreachable");
}

Vec Regularizer::ChoiceMap(const Vec& y) const {
  CheckFinite(y, n_);
  switch (kind_) {
    case RegularizerKind::kEntropic: {
      double m = y[0];
      for (double v : y) m = std::max(m, v);
      Vec x(n_);
      double s = 0.0;
      for (int k = 0; k < n_; ++k) {
        x[k] = std::exp(y[k] - m);
        s += x[k];
      }
      for (double& p : x) p /= s;
      return x;
    }
    case RegularizerKind::kEuclidean:
      return ProjectToSimplex(y);
  }
  throw std::logic_error("unreachable");
}

double Regularizer::Conjugate(const Vec& y) const {
  CheckFinite(y, n_);
  switch (kind_) {
    case RegularizerKind::kEntropic:
      return LogSumExp(y);
    case RegularizerKind::kEuclidean: {
      Vec x = ProjectToSimplex(y);
      double s = 0.0;
      for (int k = 0; k < n_; ++k) s += y[k] * x[k] - 0.5 * x[k] * x[k];
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

double Regularizer::Omega() const {
  switch (kind_) {
    case RegularizerKind::kEntropic:
      return std::log(static_cast<double>(n_));
    case RegularizerKind::kEuclidean:
      return 0.5 - 0.5 / static_cast<double>(n_);
  }
  throw std::logic_error("unreachable");
}

StrongConvexity Regularizer::StrongConvexityConstant() const {
  switch (kind_) {
    case RegularizerKind::kEntropic:
      return {1.0, "l1"};  // Pinsker
    case RegularizerKind::kEuclidean:
      return {1.0, "l2"};
  }
  throw std::logic_error("unreachable");
}

}  // namespace forel
