#include "tabml/core/deadline.hpp"

#include "tabml/core/error.hpp"

namespace tabml {
namespace {

thread_local std::optional<std::chrono::steady_clock::time_point> current_deadline;

}  // namespace

ScopedDeadline::ScopedDeadline(std::chrono::steady_clock::time_point deadline)
    : previous_(current_deadline) {
  current_deadline = deadline;
}

ScopedDeadline::ScopedDeadline(std::chrono::duration<double> budget)
    : ScopedDeadline(std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(budget)) {}

ScopedDeadline::~ScopedDeadline() { current_deadline = previous_; }

void CheckDeadline() {
  if (current_deadline && std::chrono::steady_clock::now() > *current_deadline) {
    throw Error(ErrorCode::kTimedOut, "wall-time budget exceeded");
  }
}

}  // namespace tabml
