#pragma once

#include "nemclock/params.hpp"

#include "json.hpp"

namespace nemclock {

// Strict readers: unknown keys and wrong types raise ConfigError.

[[nodiscard]] nlohmann::json to_json(const LeadSpec& lead);
[[nodiscard]] nlohmann::json to_json(const SystemParams& params);
[[nodiscard]] nlohmann::json to_json(const QuadratureSettings& quad);

[[nodiscard]] SystemParams system_params_from_json(const nlohmann::json& j);
[[nodiscard]] QuadratureSettings quadrature_from_json(const nlohmann::json& j);

/// Rejects keys of `j` that are not in `allowed`; `where` prefixes the message.
void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where);

} // namespace nemclock
