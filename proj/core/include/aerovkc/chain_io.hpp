#pragma once

#include "aerovkc/chain.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace aerovkc {

/// Chain description error; `line()` is the 1-based source line (0 when unknown).
class ChainFormatError : public KinematicsError {
 public:
  ChainFormatError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_ = 0;
};

nlohmann::json transform_to_json(const RigidTransform& t);
/// Accepts {"xyz": [...], "rpy": [...]} or {"xyz": [...], "rotation": [[...], [...], [...]]}.
RigidTransform transform_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
Vector3d vec3_from_json(const nlohmann::json& j);

nlohmann::json collision_to_json(const CollisionPrimitive& c);
CollisionPrimitive collision_from_json(const nlohmann::json& j);

nlohmann::json chain_to_json(const KinematicChain& chain);
/// Builds a chain from an already parsed document (no line information).
KinematicChain chain_from_json(const nlohmann::json& j);

/// Parses and validates a chain description, reporting the offending line on error.
KinematicChain parse_chain(std::string_view text, const std::string& source = "<string>");
KinematicChain load_chain(const std::filesystem::path& path);

}  // namespace aerovkc
