#include "invpend/parallel.hpp"

#include <omp.h>

namespace invpend {

int parallel_threads() { return omp_get_max_threads(); }

}  // namespace invpend
