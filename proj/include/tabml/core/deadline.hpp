#ifndef TABML_CORE_DEADLINE_HPP_
#define TABML_CORE_DEADLINE_HPP_

#include <chrono>
#include <optional>

namespace tabml {

// Installs a wall-clock deadline for the current thread. Iterative fitters call
// CheckDeadline() between iterations, which throws Error(kTimedOut) once the
// deadline has passed. Deadlines nest; the innermost one wins.
class ScopedDeadline {
 public:
  explicit ScopedDeadline(std::chrono::steady_clock::time_point deadline);
  explicit ScopedDeadline(std::chrono::duration<double> budget);
  ~ScopedDeadline();
  ScopedDeadline(const ScopedDeadline&) = delete;
  ScopedDeadline& operator=(const ScopedDeadline&) = delete;

 private:
  std::optional<std::chrono::steady_clock::time_point> previous_;
};

void CheckDeadline();

}  // namespace tabml

#endif  // TABML_CORE_DEADLINE_HPP_
