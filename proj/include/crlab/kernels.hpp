#pragma once

// Data-parallel sweeps used by the validators, the safe-extension search and
// the cut computation. Each kernel has a serial reference and an OpenMP
// version; both produce identical results (and rethrow the same exception,
// the one raised at the lowest index) regardless of thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crlab::kernels {

enum class Execution { kSerial, kParallel };

template <class T, class Fn>
auto map_serial(std::span<const T> items, Fn&& fn) {
  using R = std::invoke_result_t<Fn&, const T&>;
  std::vector<R> out;
  out.reserve(items.size());
  for (const T& item : items) out.push_back(fn(item));
  return out;
}

template <class T, class Fn>
auto map_parallel(std::span<const T> items, Fn&& fn) {
  using R = std::invoke_result_t<Fn&, const T&>;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(items.size());
  std::vector<std::optional<R>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      slots[i].emplace(fn(items[i]));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(items.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <class T, class Fn>
auto map(std::span<const T> items, Fn&& fn,
         Execution exec = Execution::kParallel) {
  return exec == Execution::kSerial ? map_serial(items, fn)
                                    : map_parallel(items, fn);
}

// Indices i in [0, n) with pred(i), ascending.
template <class Pred>
std::vector<std::size_t> select_serial(std::size_t n, Pred&& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (pred(i)) out.push_back(i);
  }
  return out;
}

template <class Pred>
std::vector<std::size_t> select_parallel(std::size_t n, Pred&& pred) {
  std::vector<char> keep(n, 0);
  std::vector<std::exception_ptr> errors(n);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    try {
      keep[i] = pred(static_cast<std::size_t>(i)) ? 1 : 0;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

template <class Pred>
std::vector<std::size_t> select(std::size_t n, Pred&& pred,
                                Execution exec = Execution::kParallel) {
  return exec == Execution::kSerial ? select_serial(n, pred)
                                    : select_parallel(n, pred);
}

// Lowest index i with bad(i), if any.
template <class Pred>
std::optional<std::size_t> first_violation(std::size_t n, Pred&& bad,
                                           Execution exec = Execution::kParallel) {
  if (exec == Execution::kSerial) {
    for (std::size_t i = 0; i < n; ++i) {
      if (bad(i)) return i;
    }
    return std::nullopt;
  }
  auto hits = select_parallel(n, bad);
  if (hits.empty()) return std::nullopt;
  return hits.front();
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace crlab::kernels
