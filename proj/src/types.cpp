#include "km/types.hpp"

#include <cmath>
#include <stdexcept>

namespace km {

PmfVector::PmfVector(Vector entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0)
    throw std::invalid_argument("PmfVector: empty vector");
  double sum = 0.0;
  for (Eigen::Index d = 0; d < entries_.size(); ++d) {
    double& e = entries_[d];
    if (!std::isfinite(e))
      throw std::invalid_argument("PmfVector: non-finite entry");
    if (e < 0.0) {
      if (e < -kNegTol)
        throw std::invalid_argument("PmfVector: negative entry below -1e-12");
      e = 0.0;  // clamp tiny numerical negativity
    }
    sum += e;
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw std::invalid_argument("PmfVector: entries sum to " +
                                std::to_string(sum) + ", not 1");
}

PmfVector PmfVector::uniform(int dim) {
  if (dim <= 0) throw std::invalid_argument("PmfVector: dim must be positive");
  return PmfVector(Vector::Constant(dim, 1.0 / dim));
}

double PmfVector::dot(const IndicatorVector& psi) const {
  if (psi.dim() != dim())
    throw std::invalid_argument("dot: dimension mismatch");
  return entries_.dot(psi.entries());
}

IndicatorVector::IndicatorVector(Vector entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0)
    throw std::invalid_argument("IndicatorVector: empty vector");
  for (Eigen::Index d = 0; d < entries_.size(); ++d) {
    const double e = entries_[d];
    if (e != 0.0 && e != 1.0)
      throw std::invalid_argument("IndicatorVector: entries must be 0 or 1");
  }
}

IndicatorVector IndicatorVector::zeros(int dim) {
  return IndicatorVector(Vector::Zero(dim));
}

IndicatorVector IndicatorVector::ones(int dim) {
  return IndicatorVector(Vector::Ones(dim));
}

IndicatorVector IndicatorVector::complemented() const {
  return IndicatorVector(Vector::Ones(entries_.size()) - entries_);
}

int IdIndex::add(std::int64_t external) {
  auto [it, inserted] = to_index_.try_emplace(external, size());
  if (inserted) externals_.push_back(external);
  return it->second;
}

std::optional<int> IdIndex::find(std::int64_t external) const {
  auto it = to_index_.find(external);
  if (it == to_index_.end()) return std::nullopt;
  return it->second;
}

void ObservationSet::add(std::int64_t user_id, std::int64_t item_id, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("ObservationSet: p outside [0,1] for (" +
                                std::to_string(user_id) + "," +
                                std::to_string(item_id) + ")");
  const int u = users_.add(user_id);
  const int i = items_.add(item_id);
  if (u == static_cast<int>(by_user_.size())) by_user_.emplace_back();
  if (i == static_cast<int>(by_item_.size())) by_item_.emplace_back();
  // duplicate check: scan the shorter adjacency list
  const auto& bucket =
      by_user_[u].size() <= by_item_[i].size() ? by_user_[u] : by_item_[i];
  for (int rec : bucket) {
    if (records_[rec].user == u && records_[rec].item == i)
      throw std::invalid_argument("ObservationSet: duplicate pair (" +
                                  std::to_string(user_id) + "," +
                                  std::to_string(item_id) + ")");
  }
  const int rec = size();
  records_.push_back({u, i, p});
  by_user_[u].push_back(rec);
  by_item_[i].push_back(rec);
}

KolmogorovModel::KolmogorovModel(int D, IdIndex users, IdIndex items,
                                 std::vector<PmfVector> theta,
                                 std::vector<IndicatorVector> psi,
                                 std::vector<std::string> event_labels)
    : D_(D),
      users_(std::move(users)),
      items_(std::move(items)),
      theta_(std::move(theta)),
      psi_(std::move(psi)),
      event_labels_(std::move(event_labels)) {
  if (static_cast<int>(theta_.size()) != users_.size())
    throw std::invalid_argument("model: one theta per user required");
  if (static_cast<int>(psi_.size()) != items_.size())
    throw std::invalid_argument("model: one psi per item required");
  validate_model(*this);
}

double predict(const KolmogorovModel& m, std::int64_t user_id,
               std::int64_t item_id) {
  const auto u = m.users().find(user_id);
  const auto i = m.items().find(item_id);
  if (!u) throw std::out_of_range("predict: unknown user id " +
                                  std::to_string(user_id));
  if (!i) throw std::out_of_range("predict: unknown item id " +
                                  std::to_string(item_id));
  return m.theta(*u).dot(m.psi(*i));
}

double predict_complement(const KolmogorovModel& m, std::int64_t user_id,
                          std::int64_t item_id) {
  return 1.0 - predict(m, user_id, item_id);
}

double objective(const KolmogorovModel& m, const ObservationSet& obs) {
  double e = 0.0;
  for (const Observation& ob : obs.records()) {
    const std::int64_t uid = obs.users().external(ob.user);
    const std::int64_t iid = obs.items().external(ob.item);
    const double r = predict(m, uid, iid) - ob.p;
    e += r * r;
  }
  return e;
}

void validate_model(const KolmogorovModel& m) {
  if (m.D() <= 0) throw std::invalid_argument("model: D must be positive");
  for (int u = 0; u < m.num_users(); ++u) {
    if (m.theta(u).dim() != m.D())
      throw std::invalid_argument("model: theta dimension mismatch at user " +
                                  std::to_string(m.users().external(u)));
    // PmfVector construction already enforced simplex membership; re-check
    // the sum in case the object was produced by a future in-place path.
    const double s = m.theta(u).entries().sum();
    if (std::abs(s - 1.0) > PmfVector::kSumTol)
      throw std::invalid_argument("model: theta off the simplex at user " +
                                  std::to_string(m.users().external(u)));
  }
  for (int i = 0; i < m.num_items(); ++i) {
    if (m.psi(i).dim() != m.D())
      throw std::invalid_argument("model: psi dimension mismatch at item " +
                                  std::to_string(m.items().external(i)));
  }
  if (!m.event_labels().empty() &&
      static_cast<int>(m.event_labels().size()) != m.D())
    throw std::invalid_argument("model: event_labels must be empty or size D");
}

}  // namespace km
