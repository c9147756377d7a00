#include "edr/parallel.hpp"

#include <omp.h>

namespace edr {

namespace {
int g_default_jobs = -1;
}

void set_jobs(int jobs) {
  if (g_default_jobs < 0) g_default_jobs = omp_get_max_threads();
  omp_set_dynamic(0);
  omp_set_num_threads(jobs > 0 ? jobs : g_default_jobs);
}

int jobs() { return omp_get_max_threads(); }

}  // namespace edr
