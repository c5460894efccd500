#pragma once
// Dense double-precision kernels used by the numeric inner loops
// (embedding training, t-SNE, k-means, cosine graphs).
//
// Every kernel has a scalar reference implementation; vector variants are
// compiled per ISA and picked once at startup. Set TWEETLENS_SIMD=scalar
// (or avx2 / neon) to force a particular table.

#include <cstddef>
#include <span>
#include <string_view>

namespace tweetlens::simd {

enum class Isa { Scalar, Avx2, Neon };

struct Kernels {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y *= alpha
  void (*scale)(double alpha, double* y, std::size_t n);
};

const Kernels& scalar_kernels() noexcept;
// nullptr when the ISA was not compiled in or the CPU lacks it.
const Kernels* kernels_for(Isa isa) noexcept;
// Table selected for this process (first call decides).
const Kernels& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void scale(double alpha, std::span<double> y) {
  active().scale(alpha, y.data(), y.size());
}

double norm(std::span<const double> a);
// 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace tweetlens::simd
