#include "econlab/econ/config.hpp"

#include <set>

#include "econlab/error.hpp"

namespace econlab::econ {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"levers", "n_households", "n_firms", "n_goods", "skill_dims", "horizon", "seed"};
  return keys;
}

struct Problems {
  std::vector<std::string> fields;
  std::string message;

  void add(const std::string& field, const std::string& why) {
    fields.push_back(field);
    if (!message.empty()) message += "; ";
    message += why;
  }
};

void check_population(const SimConfig& c, Problems& p) {
  if (c.n_households < 1) p.add("n_households", "n_households must be ≥ 1");
  if (c.n_firms < 1) p.add("n_firms", "n_firms must be ≥ 1");
  if (c.n_goods < 1) p.add("n_goods", "n_goods must be ≥ 1");
  if (c.skill_dims < 1 || c.skill_dims > 64) p.add("skill_dims", "skill_dims must be in [1, 64]");
  if (c.horizon < 1) p.add("horizon", "horizon must be ≥ 1");
}

}  // namespace

SimConfig make_config(const ParameterRegistry& registry) {
  SimConfig config;
  config.levers = registry.defaults();
  return config;
}

void validate_config(const SimConfig& config, const ParameterRegistry& registry) {
  Problems p;
  check_population(config, p);
  for (const auto& [name, value] : config.levers) {
    const LeverSpec* lever = registry.find_lever(name);
    if (lever == nullptr) {
      p.add(name, "unknown lever: " + name);
    } else if (auto err = registry.check_value(*lever, value)) {
      p.add(name, *err);
    }
  }
  if (!p.fields.empty()) throw ValidationError(p.message, p.fields);
}

SimConfig parse_config(const Json& object, const ParameterRegistry& registry) {
  if (!object.is_object()) throw ValidationError("config must be a JSON object", {"<root>"});
  Problems p;
  SimConfig config = make_config(registry);

  for (const auto& [key, value] : object.items()) {
    if (!known_keys().contains(key)) p.add(key, "unknown key: " + key);
  }

  auto read_int = [&](const char* key, int& out) {
    auto it = object.find(key);
    if (it == object.end()) return;
    if (!it->is_number_integer()) {
      p.add(key, std::string(key) + " must be an integer");
      return;
    }
    auto v = it->get<std::int64_t>();
    if (v < -1'000'000'000 || v > 1'000'000'000) {
      p.add(key, std::string(key) + " out of range");
      return;
    }
    out = static_cast<int>(v);
  };
  read_int("n_households", config.n_households);
  read_int("n_firms", config.n_firms);
  read_int("n_goods", config.n_goods);
  read_int("skill_dims", config.skill_dims);
  read_int("horizon", config.horizon);

  if (auto it = object.find("seed"); it != object.end()) {
    if (it->is_number_unsigned()) {
      config.seed = it->get<std::uint64_t>();
    } else if (it->is_number_integer() && it->get<std::int64_t>() >= 0) {
      config.seed = static_cast<std::uint64_t>(it->get<std::int64_t>());
    } else {
      p.add("seed", "seed must be a non-negative integer");
    }
  }

  if (auto it = object.find("levers"); it != object.end()) {
    if (!it->is_object()) {
      p.add("levers", "levers must be an object");
    } else {
      for (const auto& [name, value] : it->items()) {
        const LeverSpec* lever = registry.find_lever(name);
        if (lever == nullptr) {
          p.add(name, "unknown lever: " + name);
        } else if (auto err = registry.check_value(*lever, value)) {
          p.add(name, *err);
        } else {
          config.levers[name] = ParameterRegistry::normalize(*lever, value);
        }
      }
    }
  }
  check_population(config, p);
  if (!p.fields.empty()) throw ValidationError(p.message, p.fields);
  return config;
}

Json to_json(const SimConfig& config) {
  Json levers = Json::object();
  for (const auto& [name, value] : config.levers) levers[name] = value;
  return {{"levers", levers},
          {"n_households", config.n_households},
          {"n_firms", config.n_firms},
          {"n_goods", config.n_goods},
          {"skill_dims", config.skill_dims},
          {"horizon", config.horizon},
          {"seed", config.seed}};
}

}  // namespace econlab::econ
