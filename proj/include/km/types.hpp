#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace km {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class IndicatorVector;

// A point on the probability simplex: entries >= 0, sum within 1e-9 of 1.
// Entries in [-1e-12, 0) are clamped to 0 on construction; anything below
// that, a bad sum, or a non-finite entry throws std::invalid_argument.
class PmfVector {
 public:
  static constexpr double kSumTol = 1e-9;
  static constexpr double kNegTol = 1e-12;

  explicit PmfVector(Vector entries);
  static PmfVector uniform(int dim);

  const Vector& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.size()); }
  double operator[](int d) const { return entries_[d]; }

  double dot(const IndicatorVector& psi) const;

 private:
  Vector entries_;
};

// A subset of the D elementary events, stored as exact 0.0/1.0 doubles so it
// can participate in Eigen expressions directly.
class IndicatorVector {
 public:
  explicit IndicatorVector(Vector entries);
  static IndicatorVector zeros(int dim);
  static IndicatorVector ones(int dim);

  const Vector& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.size()); }
  bool get(int d) const { return entries_[d] != 0.0; }
  int support_size() const { return static_cast<int>(entries_.sum()); }
  bool is_all_ones() const { return support_size() == dim(); }

  // the indicator of the complement subset, 1 - psi
  IndicatorVector complemented() const;

  bool operator==(const IndicatorVector& o) const {
    return entries_ == o.entries_;
  }

 private:
  Vector entries_;
};

// Bidirectional map between external (file-level) integer ids and dense
// 0-based indices, in first-seen order.
class IdIndex {
 public:
  int add(std::int64_t external);  // inserts if absent, returns dense index
  std::optional<int> find(std::int64_t external) const;
  std::int64_t external(int index) const { return externals_.at(index); }
  int size() const { return static_cast<int>(externals_.size()); }
  const std::vector<std::int64_t>& externals() const { return externals_; }

 private:
  std::unordered_map<std::int64_t, int> to_index_;
  std::vector<std::int64_t> externals_;
};

struct Observation {
  int user;  // dense index
  int item;  // dense index
  double p;  // empirical probability in [0,1]
};

// The observed index set K with its empirical probabilities.  Keeps
// per-user and per-item adjacency so the per-entity subproblem sums are
// cheap to assemble.
class ObservationSet {
 public:
  // throws std::invalid_argument on p outside [0,1] or duplicate (u,i)
  void add(std::int64_t user_id, std::int64_t item_id, double p);

  const std::vector<Observation>& records() const { return records_; }
  int size() const { return static_cast<int>(records_.size()); }
  int num_users() const { return users_.size(); }
  int num_items() const { return items_.size(); }
  const IdIndex& users() const { return users_; }
  const IdIndex& items() const { return items_; }

  // record indices touching a given dense user / item
  const std::vector<int>& of_user(int u) const { return by_user_.at(u); }
  const std::vector<int>& of_item(int i) const { return by_item_.at(i); }

 private:
  std::vector<Observation> records_;
  IdIndex users_, items_;
  std::vector<std::vector<int>> by_user_, by_item_;
};

// Learned model: one PMF per user, one indicator per item, both over the
// same D latent elementary events.  Immutable after construction; training
// builds fresh instances instead of mutating.
class KolmogorovModel {
 public:
  KolmogorovModel(int D, IdIndex users, IdIndex items,
                  std::vector<PmfVector> theta, std::vector<IndicatorVector> psi,
                  std::vector<std::string> event_labels = {});

  int D() const { return D_; }
  int num_users() const { return users_.size(); }
  int num_items() const { return items_.size(); }
  const IdIndex& users() const { return users_; }
  const IdIndex& items() const { return items_; }
  const PmfVector& theta(int u) const { return theta_.at(u); }
  const IndicatorVector& psi(int i) const { return psi_.at(i); }
  const std::vector<std::string>& event_labels() const { return event_labels_; }

 private:
  int D_;
  IdIndex users_, items_;
  std::vector<PmfVector> theta_;
  std::vector<IndicatorVector> psi_;
  std::vector<std::string> event_labels_;  // empty or size D, uninterpreted
};

// P[user u answers "yes" to item i] = theta_u . psi_i, by external ids.
// Throws std::out_of_range for ids the model has never seen.
double predict(const KolmogorovModel& m, std::int64_t user_id,
               std::int64_t item_id);

// P of the complementary outcome, computed as 1 - predict so the two always
// sum to one exactly.
double predict_complement(const KolmogorovModel& m, std::int64_t user_id,
                          std::int64_t item_id);

// Sum of squared residuals over the observed set (ids matched externally;
// every observation must be known to the model).
double objective(const KolmogorovModel& m, const ObservationSet& obs);

// Re-checks every stored invariant (simplex membership, binary entries,
// dimension agreement, label count); throws std::invalid_argument on the
// first violation.  Model construction already runs this.
void validate_model(const KolmogorovModel& m);

}  // namespace km
