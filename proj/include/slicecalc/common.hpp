#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace slicecalc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Global structural tolerance: matrix identities (I*I = -id, Moore-Penrose
/// conditions, projector idempotence) are accepted below this Frobenius bound
/// unless a caller overrides it.
inline constexpr double kStructureTol = 1e-10;

/// Singular values below kSvdCutoff * sigma_max are treated as zero.
inline constexpr double kSvdCutoff = 1e-10;

/// Default finite-difference step scale.
inline constexpr double kDerivativeStep = 1e-5;

/// Default node count per circle for Cauchy quadrature.
inline constexpr int kQuadratureNodes = 64;

enum class ErrorCode {
  UnsupportedAlgebra,
  DimensionMismatch,
  NotAComplexStructure,
  InvalidProbe,
  DuplicateStructure,
  TupleNotDistinct,
  SingularPair,
  InsufficientProbes,
  DomainViolation,
  KernelViolation,
  BranchCut,
  RadiusError,
  StepSizeError,
  ConvergenceDomain,
  InvalidPath,
  NotSerializable,
  BadInput,
  IoError,
  CheckFailed,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnsupportedAlgebra: return "unsupported-algebra";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NotAComplexStructure: return "not-a-complex-structure";
    case ErrorCode::InvalidProbe: return "invalid-probe";
    case ErrorCode::DuplicateStructure: return "duplicate-structure";
    case ErrorCode::TupleNotDistinct: return "tuple-not-distinct";
    case ErrorCode::SingularPair: return "singular-pair";
    case ErrorCode::InsufficientProbes: return "insufficient-probes";
    case ErrorCode::DomainViolation: return "domain-violation";
    case ErrorCode::KernelViolation: return "kernel-violation";
    case ErrorCode::BranchCut: return "branch-cut";
    case ErrorCode::RadiusError: return "radius-error";
    case ErrorCode::StepSizeError: return "step-size-error";
    case ErrorCode::ConvergenceDomain: return "convergence-domain";
    case ErrorCode::InvalidPath: return "invalid-path";
    case ErrorCode::NotSerializable: return "not-serializable";
    case ErrorCode::BadInput: return "bad-input";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::CheckFailed: return "check-failed";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform point on the unit sphere of R^m.
inline Vec random_unit_vector(Rng& rng, int m) {
  Vec v(m);
  double n = 0.0;
  do {
    for (int i = 0; i < m; ++i) v[i] = gaussian(rng);
    n = v.norm();
  } while (n < 1e-8);
  return v / n;
}

inline bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool approx(const Mat& a, const Mat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= tol;
}

inline bool approx(const Vec& a, const Vec& b, double tol) {
  if (a.size() != b.size()) return false;
  return (a - b).norm() <= tol;
}

/// Formats with 12 significant digits (CLI contract).
inline std::string format_sig(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

/// Thread cap for batch evaluation: SLICECALC_THREADS wins over hardware
/// concurrency; values below 1 are clamped to 1.
inline unsigned thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("SLICECALC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && static_cast<unsigned long>(v) < hw) return static_cast<unsigned>(v);
    if (v >= 1) return static_cast<unsigned>(v);
    return 1;
  }
  return hw;
}

/// Index-parallel loop with deterministic result placement. Falls back to the
/// serial path for small batches or a cap of one thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned threads = thread_cap();
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (static_cast<std::size_t>(threads) > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace slicecalc
