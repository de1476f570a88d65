#include "truncq/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace truncq {

bool all_finite(const Vector& x) { return x.allFinite(); }
bool all_finite(const Matrix& x) { return x.allFinite(); }

void require_finite(const Vector& x, const char* name) {
  require(x.allFinite(), ErrorCode::InvalidInput, std::string(name) + " has non-finite entries");
}

void require_finite(const Matrix& x, const char* name) {
  require(x.allFinite(), ErrorCode::InvalidInput, std::string(name) + " has non-finite entries");
}

// ---------------------------------------------------------------------------
// TruncationSet

TruncationSet::TruncationSet(std::vector<std::size_t> indices, std::size_t ambient)
    : indices_(std::move(indices)), ambient_(ambient) {
  std::sort(indices_.begin(), indices_.end());
  require(std::adjacent_find(indices_.begin(), indices_.end()) == indices_.end(),
          ErrorCode::InvalidInput, "truncation set has duplicate indices");
  require(indices_.empty() || indices_.back() < ambient_, ErrorCode::InvalidInput,
          "truncation index out of range");
}

TruncationSet TruncationSet::full(std::size_t ambient) {
  std::vector<std::size_t> idx(ambient);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return TruncationSet(std::move(idx), ambient);
}

TruncationSet TruncationSet::empty(std::size_t ambient) { return TruncationSet({}, ambient); }

TruncationSet TruncationSet::tail(std::size_t ambient, std::size_t t) {
  require(t <= ambient, ErrorCode::InvalidInput, "tail size exceeds ambient dimension");
  std::vector<std::size_t> idx(t);
  std::iota(idx.begin(), idx.end(), ambient - t);
  return TruncationSet(std::move(idx), ambient);
}

bool TruncationSet::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

TruncationSet TruncationSet::complement() const {
  std::vector<std::size_t> out;
  out.reserve(ambient_ - indices_.size());
  auto it = indices_.begin();
  for (std::size_t i = 0; i < ambient_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return TruncationSet(std::move(out), ambient_);
}

TruncationSet TruncationSet::intersect(const TruncationSet& other) const {
  require(ambient_ == other.ambient_, ErrorCode::InvalidInput, "ambient mismatch");
  std::vector<std::size_t> out;
  std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                        other.indices_.end(), std::back_inserter(out));
  return TruncationSet(std::move(out), ambient_);
}

TruncationSet TruncationSet::unite(const TruncationSet& other) const {
  require(ambient_ == other.ambient_, ErrorCode::InvalidInput, "ambient mismatch");
  std::vector<std::size_t> out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out));
  return TruncationSet(std::move(out), ambient_);
}

bool TruncationSet::is_subset_of(const TruncationSet& other) const {
  return ambient_ == other.ambient_ &&
         std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

std::vector<bool> TruncationSet::mask() const {
  std::vector<bool> m(ambient_, false);
  for (auto i : indices_) m[i] = true;
  return m;
}

std::string TruncationSet::to_string_one_based() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    if (j) os << ", ";
    os << indices_[j] + 1;
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// Constraint and exponent validation

LinearMatrixMap::LinearMatrixMap(const std::vector<Matrix>& sensing) {
  require(!sensing.empty(), ErrorCode::InvalidInput, "a matrix map needs at least one sensing matrix");
  rows_ = sensing.front().rows();
  cols_ = sensing.front().cols();
  require(rows_ >= 1 && cols_ >= 1, ErrorCode::InvalidInput, "sensing matrices must be nonempty");
  stacked_.resize(static_cast<Eigen::Index>(sensing.size()), rows_ * cols_);
  for (std::size_t i = 0; i < sensing.size(); ++i) {
    require(sensing[i].rows() == rows_ && sensing[i].cols() == cols_, ErrorCode::InvalidInput,
            "sensing matrices must share one shape");
    require_finite(sensing[i], "sensing matrix");
    stacked_.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(sensing[i].data(), rows_ * cols_);
  }
}

LinearMatrixMap::LinearMatrixMap(Matrix stacked, Eigen::Index rows, Eigen::Index cols)
    : stacked_(std::move(stacked)), rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 1 && stacked_.rows() >= 1, ErrorCode::InvalidInput,
          "matrix map dimensions must be positive");
  require(stacked_.cols() == rows * cols, ErrorCode::InvalidInput,
          "stacked map width must equal rows * cols");
  require_finite(stacked_, "matrix map");
}

LinearMatrixMap LinearMatrixMap::identity(Eigen::Index rows, Eigen::Index cols) {
  return LinearMatrixMap(Matrix::Identity(rows * cols, rows * cols), rows, cols);
}

Matrix LinearMatrixMap::sensing(Eigen::Index i) const {
  require(i >= 0 && i < size(), ErrorCode::InvalidInput, "sensing index out of range");
  const Vector row = stacked_.row(i).transpose();
  return Eigen::Map<const Matrix>(row.data(), rows_, cols_);
}

void validate(const NoiseConstraint& constraint) {
  std::visit(
      [](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        require(std::isfinite(c.eta) && c.eta >= 0.0, ErrorCode::InvalidInput,
                "noise level eta must be finite and nonnegative");
        if constexpr (std::is_same_v<C, LpBall>) {
          require(c.p >= 1.0, ErrorCode::InvalidInput, "LpBall requires p in [1, inf]");
        }
      },
      constraint);
}

double noise_level(const NoiseConstraint& constraint) {
  return std::visit([](const auto& c) { return c.eta; }, constraint);
}

void NormTriple::validate() const {
  require(q > 0.0 && q <= 1.0, ErrorCode::InvalidInput, "q must lie in (0, 1]");
  require(r >= q, ErrorCode::InvalidInput, "r must satisfy r >= q");
  require(p >= 1.0, ErrorCode::InvalidInput, "p must lie in [1, inf]");
}

// ---------------------------------------------------------------------------
// Norms and restrictions

double qnorm(const Vector& x, double q) {
  require(q > 0.0, ErrorCode::InvalidInput, "qnorm requires q > 0");
  require_finite(x, "x");
  if (x.size() == 0) return 0.0;
  const double peak = x.cwiseAbs().maxCoeff();
  if (q == kInf || peak == 0.0) return peak;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / peak, q);
  return peak * std::pow(acc, 1.0 / q);
}

double qnorm_pow(const Vector& x, double q) {
  require(q > 0.0 && q != kInf, ErrorCode::InvalidInput, "qnorm_pow requires finite q > 0");
  require_finite(x, "x");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) acc += std::pow(std::abs(x[i]), q);
  }
  return acc;
}

double qnorm_pow_on(const Vector& x, const TruncationSet& set, double q) {
  double acc = 0.0;
  for (auto i : set) {
    if (x[static_cast<Eigen::Index>(i)] != 0.0) {
      acc += std::pow(std::abs(x[static_cast<Eigen::Index>(i)]), q);
    }
  }
  return acc;
}

Vector restrict(const Vector& x, const TruncationSet& set) {
  require(static_cast<std::size_t>(x.size()) == set.ambient(), ErrorCode::InvalidInput,
          "restrict: set ambient size differs from vector length");
  Vector out = Vector::Zero(x.size());
  for (auto i : set) out[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(i)];
  return out;
}

TruncationSet best_k_support(const Vector& x, const TruncationSet& T, std::size_t k) {
  require(static_cast<std::size_t>(x.size()) == T.ambient(), ErrorCode::InvalidInput,
          "best_k_support: set ambient size differs from vector length");
  require(k <= T.size(), ErrorCode::InvalidInput, "best_k_support: k exceeds |T|");
  std::vector<std::size_t> idx = T.indices();
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x[static_cast<Eigen::Index>(a)]) > std::abs(x[static_cast<Eigen::Index>(b)]);
  });
  idx.resize(k);
  return TruncationSet(std::move(idx), T.ambient());
}

double sigma_k(const Vector& x, const TruncationSet& T, std::size_t k, double q) {
  const TruncationSet K = best_k_support(x, T, k);
  Vector rest = restrict(x, T);
  for (auto i : K) rest[static_cast<Eigen::Index>(i)] = 0.0;
  return qnorm(rest, q);
}

ConeConstraintSides cone_constraint_sides(const Vector& x, const Vector& xhat,
                                          const TruncationSet& T, std::size_t k, double q) {
  require(x.size() == xhat.size(), ErrorCode::InvalidInput,
          "cone constraint: x and xhat differ in length");
  const Vector v = xhat - x;
  const TruncationSet K = best_k_support(x, T, k);
  const TruncationSet rest = T.intersect(K.complement());
  const double sigma = sigma_k(x, T, k, q);
  return {qnorm_pow_on(v, rest, q), 2.0 * std::pow(sigma, q) + qnorm_pow_on(v, K, q)};
}

bool cone_constraint_holds(const Vector& x, const Vector& xhat, const TruncationSet& T,
                           std::size_t k, double q) {
  const auto sides = cone_constraint_sides(x, xhat, T, k, q);
  return sides.lhs <= sides.rhs + kInequalitySlack;
}

}  // namespace truncq
