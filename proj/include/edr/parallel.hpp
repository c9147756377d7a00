#pragma once

namespace edr {

/// Thread count used by the OpenMP kernels. 0 or negative restores the
/// OpenMP runtime default.
void set_jobs(int jobs);
int jobs();

/// Restores the previous thread count on scope exit.
class ScopedJobs {
 public:
  explicit ScopedJobs(int jobs_value) : previous_(jobs()) { set_jobs(jobs_value); }
  ~ScopedJobs() { set_jobs(previous_); }
  ScopedJobs(const ScopedJobs&) = delete;
  ScopedJobs& operator=(const ScopedJobs&) = delete;

 private:
  int previous_;
};

}  // namespace edr
