#pragma once

#include <json.hpp>

#include "hypercat/circuit.hpp"

// JSON form of circuit plans and noise specs. The schema is described in the
// README; complex numbers are [re, im] pairs. Parsers throw
// std::invalid_argument on any malformed or out-of-range field.
namespace hypercat::io {

using Json = nlohmann::json;

Json to_json(const fock::ElementUnitary& e);
fock::ElementUnitary element_from_json(const Json& j);

Json to_json(const circuit::CircuitPlan& plan);
circuit::CircuitPlan plan_from_json(const Json& j);

Json to_json(const circuit::NoiseSpec& noise);
/// Fields absent from `j` keep their value in `base`.
circuit::NoiseSpec noise_from_json(const Json& j, circuit::NoiseSpec base = {});

}  // namespace hypercat::io
