#include "spca/support_search.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace spca {

namespace {

double top_of_2x2(double x, double b, double z) { return 0.5 * (x + z) + std::hypot(0.5 * (x - z), b); }

class SupportSearch {
 public:
  SupportSearch(const Eigen::MatrixXd& a, Index k) : a_(a), p_(a.rows()), k_(k) {
    max_diag_.assign(static_cast<std::size_t>(p_ + 1), -std::numeric_limits<double>::infinity());
    max_off_.assign(static_cast<std::size_t>(p_ + 1), 0.0);
    for (Index s = p_ - 1; s >= 0; --s) {
      double row_max = 0.0;
      for (Index j = s + 1; j < p_; ++j) row_max = std::max(row_max, std::abs(a_(s, j)));
      max_diag_[s] = std::max(max_diag_[s + 1], a_(s, s));
      max_off_[s] = std::max(max_off_[s + 1], row_max);
    }
    colnorm_.resize(static_cast<std::size_t>(k_), std::vector<double>(static_cast<std::size_t>(p_), 0.0));
  }

  SupportMaximum run() {
    seed_greedy();
    current_.clear();
    for (Index i = 0; i + k_ <= p_; ++i) {
      current_.push_back(i);
      descend(a_(i, i));
      current_.pop_back();
    }
    out_.ties = ties_;
    return out_;
  }

 private:
  double tie_tolerance() const { return 1e-12 * std::max(1.0, std::abs(out_.value)); }

  void offer(const std::vector<Index>& support, double value) {
    ++out_.leaves;
    if (out_.support.empty()) {
      out_.value = value;
      out_.support = support;
      return;
    }
    const double tol = tie_tolerance();
    if (value > out_.value + tol) {
      out_.value = value;
      out_.support = support;
      ties_ = 0;
    } else if (std::abs(value - out_.value) <= tol) {
      if (support == out_.support) return;
      ++ties_;
      if (std::lexicographical_compare(support.begin(), support.end(), out_.support.begin(), out_.support.end())) {
        out_.value = value;
        out_.support = support;
      }
    }
  }

  double block_top(const std::vector<Index>& support) const {
    return top_eigenvalue_small(a_(support, support));
  }

  // Forward selection gives a strong incumbent before the exact search.
  void seed_greedy() {
    std::vector<Index> chosen;
    for (Index step = 0; step < k_; ++step) {
      double best = -std::numeric_limits<double>::infinity();
      Index best_j = -1;
      for (Index j = 0; j < p_; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        std::vector<Index> trial = chosen;
        trial.push_back(j);
        std::sort(trial.begin(), trial.end());
        const double v = block_top(trial);
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      chosen.push_back(best_j);
    }
    std::sort(chosen.begin(), chosen.end());
    offer(chosen, block_top(chosen));
    out_.leaves = 0;
  }

  void descend(double lambda_p) {
    const Index m = static_cast<Index>(current_.size());
    const Index r = k_ - m;
    if (r == 0) {
      offer(current_, lambda_p);
      return;
    }
    const Index start = current_.back() + 1;
    if (p_ - start < r) return;

    std::vector<double>& cn = colnorm_[static_cast<std::size_t>(m)];
    for (Index j = start; j < p_; ++j) {
      double s = 0.0;
      for (Index i : current_) s += a_(i, j) * a_(i, j);
      cn[j] = s;
    }
    const double floor = out_.value - tie_tolerance();

    if (r == 1) {
      for (Index j = start; j < p_; ++j) {
        if (top_of_2x2(lambda_p, std::sqrt(cn[j]), a_(j, j)) < floor) continue;
        current_.push_back(j);
        offer(current_, block_top(current_));
        current_.pop_back();
      }
      return;
    }

    std::vector<double> tail(cn.begin() + start, cn.begin() + p_);
    std::nth_element(tail.begin(), tail.begin() + (r - 1), tail.end(), std::greater<>());
    double cross = 0.0;
    for (Index i = 0; i < r; ++i) cross += tail[static_cast<std::size_t>(i)];
    const double lambda_q = max_diag_[start] + double(r - 1) * max_off_[start];
    if (top_of_2x2(lambda_p, std::sqrt(cross), lambda_q) < floor) return;

    for (Index j = start; j + r <= p_; ++j) {
      current_.push_back(j);
      descend(block_top(current_));
      current_.pop_back();
    }
  }

  const Eigen::MatrixXd& a_;
  Index p_;
  Index k_;
  std::vector<double> max_diag_;
  std::vector<double> max_off_;
  std::vector<std::vector<double>> colnorm_;
  std::vector<Index> current_;
  SupportMaximum out_;
  int ties_ = 0;
};

}  // namespace

SupportMaximum max_support_eigenvalue(const Eigen::MatrixXd& a, Index k) {
  if (a.rows() != a.cols()) throw DimensionMismatch("max_support_eigenvalue: matrix is not square");
  if (k < 1 || k > a.rows()) throw PreconditionError("max_support_eigenvalue: need 1 <= k <= p");
  SupportSearch search(a, k);
  return search.run();
}

}  // namespace spca
