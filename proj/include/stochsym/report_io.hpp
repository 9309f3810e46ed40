#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "stochsym/reconstruct.hpp"
#include "stochsym/symmetry.hpp"

namespace stochsym {

using Json = nlohmann::ordered_json;

Json to_json(const ResidualReport& r);
Json to_json(const Estimate& e);
Json to_json(const WeightStats& w);
Json to_json(const McReport& r);

// model,route,time,estimator,value,stderr,n_effective,rejected_frac
std::string csv_header();
// One row per (time, estimator); multi-time rows use the last time.
void write_csv(std::ostream& out, const McReport& r);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace stochsym
