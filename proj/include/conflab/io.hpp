#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "conflab/flows.hpp"
#include "conflab/functionals.hpp"
#include "conflab/inequalities.hpp"
#include "conflab/sphere.hpp"

namespace conflab {

using json = nlohmann::ordered_json;

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

inline constexpr const char* kTraceHeader = "t,F,momentum,speed2,entropy,min_vm,min_L,dt";
inline constexpr const char* kStateHeader = "theta,u,a_rad,a_tan,vm,l_rad,l_tan,weight";

std::string trace_csv(const MonitorTrace& trace);
std::string state_csv(const GeometryState& g);
std::string witness_csv(const SphereConfig& cfg, const QuadraticFormReport& r);

json to_json(const FunctionalReport& r);
json to_json(const QuadraticFormReport& r, bool with_witness = false);

// Shortest round-trip decimal form ("nan", "inf" for non-finite values).
std::string num(double x);

} // namespace conflab
