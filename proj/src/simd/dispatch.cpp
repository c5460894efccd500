#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "tweetlens/simd.hpp"

namespace tweetlens::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, "scalar", detail::dot_scalar, detail::axpy_scalar,
                          detail::squared_distance_scalar, detail::scale_scalar};

#if defined(TWEETLENS_HAVE_AVX2)
constexpr Kernels kAvx2{Isa::Avx2, "avx2", detail::dot_avx2, detail::axpy_avx2,
                        detail::squared_distance_avx2, detail::scale_avx2};

bool cpu_has_avx2() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#if defined(TWEETLENS_HAVE_NEON)
constexpr Kernels kNeon{Isa::Neon, "neon", detail::dot_neon, detail::axpy_neon,
                        detail::squared_distance_neon, detail::scale_neon};
#endif

const Kernels& select() noexcept {
  if (const char* forced = std::getenv("TWEETLENS_SIMD")) {
    const std::string want(forced);
    if (want == "scalar") return kScalar;
    if (want == "avx2") {
      if (const Kernels* k = kernels_for(Isa::Avx2)) return *k;
    }
    if (want == "neon") {
      if (const Kernels* k = kernels_for(Isa::Neon)) return *k;
    }
  }
  if (const Kernels* k = kernels_for(Isa::Avx2)) return *k;
  if (const Kernels* k = kernels_for(Isa::Neon)) return *k;
  return kScalar;
}

}  // namespace

const Kernels& scalar_kernels() noexcept { return kScalar; }

const Kernels* kernels_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return &kScalar;
    case Isa::Avx2:
#if defined(TWEETLENS_HAVE_AVX2)
      if (cpu_has_avx2()) return &kAvx2;
#endif
      return nullptr;
    case Isa::Neon:
#if defined(TWEETLENS_HAVE_NEON)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Kernels& active() noexcept {
  static const Kernels& table = select();
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace tweetlens::simd
