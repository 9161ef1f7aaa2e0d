#pragma once

#include <iosfwd>
#include <string>

#include "km/types.hpp"

namespace km {

// Model serialization.  Schema:
//   {"D": 3,
//    "event_labels": ["Action", ...],          // [] when unlabeled
//    "theta": {"<user id>": [0.2, 0.3, 0.5], ...},
//    "psi":   {"<item id>": [0, 1, 0], ...}}
// psi entries are written as JSON integers so a round trip is bit-exact;
// theta doubles rely on shortest round-trip formatting.  Keys are emitted
// sorted, so equal models serialize to identical bytes.
std::string model_to_json(const KolmogorovModel& m);
KolmogorovModel model_from_json(const std::string& text);

void save_model(const KolmogorovModel& m, const std::string& path);
KolmogorovModel load_model(const std::string& path);  // IoError on bad file

}  // namespace km
