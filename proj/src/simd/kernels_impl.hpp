#pragma once

#include <cstddef>

namespace tweetlens::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);
void scale_scalar(double alpha, double* y, std::size_t n);

#if defined(TWEETLENS_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
void scale_avx2(double alpha, double* y, std::size_t n);
#endif

#if defined(TWEETLENS_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
void scale_neon(double alpha, double* y, std::size_t n);
#endif

}  // namespace tweetlens::simd::detail
