#include "symplane/kernels.hpp"

namespace symplane::kernels {

#if defined(SYMPLANE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SYMPLANE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::kScalar:
      return &scalar_table();
    case Isa::kAvx2:
#if defined(SYMPLANE_HAVE_AVX2)
      return &avx2_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    if (const KernelTable* t = table_for(Isa::kAvx2)) return *t;
    return scalar_table();
  }();
  return table;
}

}  // namespace symplane::kernels
