#include "km/model_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>

#include "km/errors.hpp"

namespace km {
namespace {

using nlohmann::json;

std::int64_t parse_id(const std::string& key) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (ec != std::errc() || ptr != key.data() + key.size())
    throw IoError("model json: non-integer id key '" + key + "'");
  return v;
}

}  // namespace

std::string model_to_json(const KolmogorovModel& m) {
  json j;
  j["D"] = m.D();
  j["event_labels"] = m.event_labels();
  json theta = json::object();
  for (int u = 0; u < m.num_users(); ++u) {
    const Vector& t = m.theta(u).entries();
    theta[std::to_string(m.users().external(u))] =
        std::vector<double>(t.data(), t.data() + t.size());
  }
  json psi = json::object();
  for (int i = 0; i < m.num_items(); ++i) {
    const Vector& p = m.psi(i).entries();
    std::vector<int> bits(p.size());
    for (Eigen::Index d = 0; d < p.size(); ++d) bits[d] = p[d] != 0.0 ? 1 : 0;
    psi[std::to_string(m.items().external(i))] = bits;
  }
  j["theta"] = std::move(theta);
  j["psi"] = std::move(psi);
  return j.dump(2) + "\n";  // json objects iterate sorted by key
}

KolmogorovModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model json: parse failure: ") + e.what());
  }
  try {
    const int D = j.at("D").get<int>();
    std::vector<std::string> labels;
    if (j.contains("event_labels"))
      labels = j["event_labels"].get<std::vector<std::string>>();
    IdIndex users, items;
    std::vector<PmfVector> theta;
    std::vector<IndicatorVector> psi;
    for (const auto& [key, val] : j.at("theta").items()) {
      users.add(parse_id(key));
      const auto coeffs = val.get<std::vector<double>>();
      theta.emplace_back(Eigen::Map<const Vector>(coeffs.data(), coeffs.size()));
    }
    for (const auto& [key, val] : j.at("psi").items()) {
      items.add(parse_id(key));
      const auto bits = val.get<std::vector<double>>();
      psi.emplace_back(Eigen::Map<const Vector>(bits.data(), bits.size()));
    }
    return KolmogorovModel(D, std::move(users), std::move(items),
                           std::move(theta), std::move(psi), std::move(labels));
  } catch (const json::exception& e) {
    throw IoError(std::string("model json: bad schema: ") + e.what());
  } catch (const std::invalid_argument& e) {
    // invariant violations in file content are file problems
    throw IoError(std::string("model json: invalid model: ") + e.what());
  }
}

void save_model(const KolmogorovModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << model_to_json(m);
  if (!out) throw IoError("write failure: " + path);
}

KolmogorovModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace km
