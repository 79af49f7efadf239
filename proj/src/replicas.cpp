#include "tdmc/replicas.hpp"

#include <omp.h>

namespace tdmc {

int available_threads() { return omp_get_max_threads(); }

}  // namespace tdmc
