/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

///////////////////////////////////////////////////////////////////////////////
//
// Numeric foundations shared by every other header: dense matrix aliases,
// the error type, block assembly helpers, covariance checks, selection
// matrices, a thresholded pseudoinverse and deterministic normal streams.
//
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dlqg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Default relative singular-value cutoff for pinv().
inline constexpr double kDefaultRtol = 1e-9;

enum class ErrorCode {
  kInvalidMatrix,
  kDimMismatch,
  kTimeOutOfRange,
  kInvalidDelay,
  kWrongControllerCount,
  kNumericalBreakdown,
  kUnsupportedProtocol,
  kInvalidModel,
  kConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidMatrix: return "InvalidMatrix";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kTimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::kInvalidDelay: return "InvalidDelay";
    case ErrorCode::kWrongControllerCount: return "WrongControllerCount";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kUnsupportedProtocol: return "UnsupportedProtocol";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kConfig: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the library. `field` names the offending model or
/// config entry when there is one; `step` is the 1-based time index for
/// numerical breakdowns (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {},
        int step = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " +
                           (field.empty() ? "" : field + ": ") + message),
        code_(code),
        field_(std::move(field)),
        step_(step) {}

  ErrorCode code() const { return code_; }
  const std::string& field() const { return field_; }
  int step() const { return step_; }

 private:
  ErrorCode code_;
  std::string field_;
  int step_;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDimMismatch, what);
}

inline bool all_finite(const Mat& m) {
  return m.size() == 0 || m.allFinite();
}

// ---------------------------------------------------------------------------
// Block assembly. Zero-sized operands are legal everywhere.
// ---------------------------------------------------------------------------

inline Mat blkdiag(const std::vector<Mat>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

inline Mat vstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat(0, 0);
  const Eigen::Index cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    require_dims(b.cols() == cols, "vstack: column counts differ");
    rows += b.rows();
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

inline Mat hstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat(0, 0);
  const Eigen::Index rows = blocks.front().rows();
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    require_dims(b.rows() == rows, "hstack: row counts differ");
    cols += b.cols();
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

inline Vec concat(const std::vector<Vec>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  Vec out(n);
  Eigen::Index k = 0;
  for (const auto& p : parts) {
    out.segment(k, p.size()) = p;
    k += p.size();
  }
  return out;
}

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

// ---------------------------------------------------------------------------
// Covariances
// ---------------------------------------------------------------------------

/// Throws kInvalidModel (tagged with `field`) unless `cov` is square, finite,
/// symmetric within 1e-12 relative and PSD with
/// min eigenvalue >= -1e-10 * max eigenvalue.
inline void check_covariance(const Mat& cov, const std::string& field) {
  if (cov.rows() != cov.cols())
    throw Error(ErrorCode::kInvalidModel, "covariance must be square", field);
  if (!all_finite(cov))
    throw Error(ErrorCode::kInvalidModel, "non-finite entry", field);
  if (cov.size() == 0) return;
  const double scale = cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::kInvalidModel, "covariance not symmetric", field);
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(hi, 0.0))
    throw Error(ErrorCode::kInvalidModel, "covariance not positive semi-definite",
                field);
}

struct GaussianSpec {
  Vec mean;
  Mat covariance;

  void validate(const std::string& field) const {
    check_covariance(covariance, field);
    if (mean.size() != covariance.rows())
      throw Error(ErrorCode::kInvalidModel, "mean/covariance size mismatch", field);
  }
};

/// Symmetric square root V sqrt(max(L,0)) V^T of a PSD matrix; used to colour
/// standard normal draws.
inline Mat psd_sqrt(const Mat& cov) {
  if (cov.size() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(cov));
  const Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Selection matrices: binary, exactly one 1 per row. X = P Y means X is a
// sub-vector of Y.
// ---------------------------------------------------------------------------

class SelectionMat {
 public:
  /// Row r picks component indices[r] out of a vector of length `cols`.
  static SelectionMat from_indices(const std::vector<int>& indices, int cols) {
    Mat m = Mat::Zero(static_cast<Eigen::Index>(indices.size()), cols);
    for (std::size_t r = 0; r < indices.size(); ++r) {
      if (indices[r] < 0 || indices[r] >= cols)
        throw Error(ErrorCode::kDimMismatch, "selection index out of range");
      m(static_cast<Eigen::Index>(r), indices[r]) = 1.0;
    }
    return SelectionMat(std::move(m));
  }

  /// Validating constructor.
  explicit SelectionMat(Mat base) : base_(std::move(base)) {
    for (Eigen::Index r = 0; r < base_.rows(); ++r) {
      double sum = 0.0;
      for (Eigen::Index c = 0; c < base_.cols(); ++c) {
        const double v = base_(r, c);
        if (v != 0.0 && v != 1.0)
          throw Error(ErrorCode::kInvalidMatrix, "selection entry not 0/1");
        sum += v;
      }
      if (sum != 1.0)
        throw Error(ErrorCode::kInvalidMatrix, "selection row must contain one 1");
    }
  }

  const Mat& base() const { return base_; }
  Vec apply(const Vec& v) const {
    require_dims(v.size() == base_.cols(), "SelectionMat::apply");
    return base_ * v;
  }

 private:
  Mat base_;
};

// ---------------------------------------------------------------------------
// Pseudoinverse
// ---------------------------------------------------------------------------

/// Moore-Penrose pseudoinverse; singular values below rtol * sigma_max are
/// treated as zero.
inline Mat pinv(const Mat& m, double rtol = kDefaultRtol) {
  if (!all_finite(m))
    throw Error(ErrorCode::kInvalidMatrix, "pinv: non-finite input");
  if (m.rows() == 0 || m.cols() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const double cutoff = rtol * s(0);
  Vec inv = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic stream of standard normal draws. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard; the
/// uniform and Box-Muller conversions are done here in a fixed order so the
/// stream does not depend on the library's distribution implementation.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_index) {
    std::uint64_t mix = seed;
    const std::uint64_t a = detail::splitmix64(mix);
    mix ^= stream_index * 0xD1B54A32D192ED03ULL;
    const std::uint64_t b = detail::splitmix64(mix);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(stream_index),
                      static_cast<std::uint32_t>(stream_index >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on (0, 1]: 53 random bits, never zero.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec normal_vector(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Mat normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream seeded_stream(std::uint64_t seed, std::uint64_t stream_index) {
  return RandomStream(seed, stream_index);
}

}  // namespace dlqg
