// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace cbt
{
//! Number of worker threads used by grid-wide loops (default 1).
void set_thread_count(int n);
int thread_count();

/*!
 * Run body(begin, end) over [0, n) split into contiguous chunks.
 *
 * Chunks run concurrently when more than one thread is configured; the body
 * must only write to disjoint outputs.
 */
void parallel_for(std::size_t n,
                  std::function<void(std::size_t, std::size_t)> const& body);

//! Neumaier compensated summation.
class CompensatedSum
{
  public:
    void add(double x)
    {
        double const t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x)
    {
        this->add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0;
    double comp_ = 0;
};

/*!
 * Deterministic parallel sum of term(i) over [0, n).
 *
 * The partition into blocks is fixed independently of the thread count and
 * block partials are combined in order, so results do not depend on
 * threading.
 */
double parallel_sum(std::size_t n, std::function<double(std::size_t)> const& term);

//! Deterministic parallel max of term(i) over [0, n); returns 0 when n == 0.
double parallel_max(std::size_t n, std::function<double(std::size_t)> const& term);

}  // namespace cbt
