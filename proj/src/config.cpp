#include "bac/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bac {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view why) {
  throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) +
                    "' (" + std::string(why) + ")");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    bad_value(key, v, "expected a number");
  return out;
}

std::size_t to_count(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    bad_value(key, v, "expected an integer");
  if (out < 0) bad_value(key, v, "must be non-negative");
  return static_cast<std::size_t>(out);
}

std::size_t to_positive(std::string_view key, std::string_view v) {
  const std::size_t n = to_count(key, v);
  if (n == 0) bad_value(key, v, "must be >= 1");
  return n;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "expected true/false");
}

Interval to_interval(std::string_view key, std::string_view v) {
  // "lo,hi" or "[lo, hi]"
  std::string s(v);
  std::erase_if(s, [](char c) { return c == '[' || c == ']' || c == ' '; });
  const auto comma = s.find(',');
  if (comma == std::string::npos) bad_value(key, v, "expected lo,hi");
  Interval iv{to_double(key, std::string_view(s).substr(0, comma)),
              to_double(key, std::string_view(s).substr(comma + 1))};
  if (!(iv.lo < iv.hi)) bad_value(key, v, "lo must be < hi");
  return iv;
}

template <typename Enum>
Enum to_enum(std::string_view key, std::string_view v,
             std::initializer_list<std::pair<std::string_view, Enum>> names) {
  for (const auto& [name, e] : names)
    if (v == name) return e;
  std::string options;
  for (const auto& [name, e] : names) options += (options.empty() ? "" : "|") + std::string(name);
  bad_value(key, v, "expected " + options);
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&t](const char* k, double ExperimentConfig::*field) {
      t[k] = [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
        c.*field = to_double(key, v);
      };
    };
    auto count = [&t](const char* k, std::size_t ExperimentConfig::*field) {
      t[k] = [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
        c.*field = to_positive(key, v);
      };
    };
    auto flag = [&t](const char* k, bool ExperimentConfig::*field) {
      t[k] = [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
        c.*field = to_bool(key, v);
      };
    };
    auto budget = [&t](const std::string& prefix, PhaseBudget ExperimentConfig::*field) {
      t[prefix + "_trials"] = [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
        (c.*field).trials = to_count(key, v);
      };
      t[prefix + "_steps"] = [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
        (c.*field).steps = to_count(key, v);
      };
    };

    t["architecture"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.architecture = to_enum<Architecture>(
          k, v,
          {{"SingleIndirect", Architecture::kSingleIndirect},
           {"SingleDirect", Architecture::kSingleDirect},
           {"TwoLevelIndirect", Architecture::kTwoLevelIndirect},
           {"TwoLevelDirect", Architecture::kTwoLevelDirect}});
    };
    t["ll_mode"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.ll_mode = to_enum<LLMode>(k, v,
                                  {{"ExplicitRole", LLMode::kExplicitRole},
                                   {"RI", LLMode::kSharedExternal},
                                   {"SharedExternal", LLMode::kSharedExternal}});
    };
    t["reward_mode"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.reward_mode = to_enum<ReinforcementMode>(
          k, v,
          {{"DistanceCost", ReinforcementMode::kDistanceCost},
           {"FailureDriven", ReinforcementMode::kFailureDriven}});
    };
    t["terminal"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.terminal = to_enum<TerminalMode>(
          k, v, {{"zero", TerminalMode::kZero}, {"absorbing", TerminalMode::kAbsorbing}});
    };
    t["hl_reinforcement"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.hl_reinforcement = to_enum<HlReinforcement>(
          k, v,
          {{"sampled", HlReinforcement::kSampled},
           {"accumulated", HlReinforcement::kAccumulated}});
    };
    t["ri_rule"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.ri_rule = to_enum<RiRule>(k, v,
                                  {{"printed", RiRule::kPrinted},
                                   {"analytic", RiRule::kAnalytic},
                                   {"action_output", RiRule::kActionOutput}});
    };
    t["reward_sign"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      if (v == "auto") {
        c.reward_sign.reset();
        return;
      }
      const double s = to_double(k, v);
      if (s != 1.0 && s != -1.0) bad_value(k, v, "expected +1, -1 or auto");
      c.reward_sign = static_cast<int>(s);
    };
    t["seeds"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      try {
        c.seeds = parse_seed_list(v);
      } catch (const ConfigError& e) {
        bad_value(k, v, e.what());
      }
    };
    t["trial_limit"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.trial_limit = to_positive(k, v);
    };
    t["hl_gamma"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.hl_gamma = to_double(k, v);
    };
    for (auto [key, field] :
         {std::pair{"hl_action_lr", &ExperimentConfig::hl_action_lr},
          std::pair{"hl_critic_lr", &ExperimentConfig::hl_critic_lr},
          std::pair{"hl_sigma", &ExperimentConfig::hl_sigma},
          std::pair{"hl_init_scale", &ExperimentConfig::hl_init_scale}})
      t[key] = [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
        c.*field = to_double(k, v);
      };
    flag("ll_critic_sees_plan", &ExperimentConfig::ll_critic_sees_plan);
    t["plan_range_ll"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.plan_range_ll = to_interval(k, v);
    };
    t["plan_range_hl_model"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.plan_range_hl_model = to_interval(k, v);
    };
    t["model_train_steps"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.model_train_steps = to_count(k, v);
    };

    real("servo_rate_hz", &ExperimentConfig::servo_rate_hz);
    count("success_steps", &ExperimentConfig::success_steps);
    real("m_cart", &ExperimentConfig::m_cart);
    real("m_pole", &ExperimentConfig::m_pole);
    real("pole_len", &ExperimentConfig::pole_len);
    real("gravity", &ExperimentConfig::gravity);
    real("force_scale", &ExperimentConfig::force_scale);
    real("x_range", &ExperimentConfig::x_range);
    real("theta_range_deg", &ExperimentConfig::theta_range_deg);
    real("init_fraction", &ExperimentConfig::init_fraction);
    count("n_hidden", &ExperimentConfig::n_hidden);
    real("gamma", &ExperimentConfig::gamma);
    real("critic_lr", &ExperimentConfig::critic_lr);
    real("action_lr", &ExperimentConfig::action_lr);
    real("momentum", &ExperimentConfig::momentum);
    real("sigma", &ExperimentConfig::sigma);
    real("init_scale", &ExperimentConfig::init_scale);
    real("model_lr", &ExperimentConfig::model_lr);
    real("k_m", &ExperimentConfig::k_m);
    real("action_limit", &ExperimentConfig::action_limit);
    count("n_ratio", &ExperimentConfig::n_ratio);
    t["ll_observes_cart"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      if (v == "auto")
        c.ll_observes_cart.reset();
      else
        c.ll_observes_cart = to_bool(k, v);
    };
    real("ll_plan_input_scale", &ExperimentConfig::ll_plan_input_scale);
    budget("phase1", &ExperimentConfig::phase1);
    budget("phase2", &ExperimentConfig::phase2);
    budget("phase3", &ExperimentConfig::phase3);
    budget("phase4", &ExperimentConfig::phase4);
    real("model_error_threshold", &ExperimentConfig::model_error_threshold);
    count("model_error_window", &ExperimentConfig::model_error_window);
    real("hl_model_error_threshold", &ExperimentConfig::hl_model_error_threshold);
    count("ri_stable_steps", &ExperimentConfig::ri_stable_steps);
    real("tracking_threshold_deg", &ExperimentConfig::tracking_threshold_deg);
    real("ll_theta_limit_deg", &ExperimentConfig::ll_theta_limit_deg);
    count("ll_trial_steps", &ExperimentConfig::ll_trial_steps);
    real("k1", &ExperimentConfig::k1);
    real("k2", &ExperimentConfig::k2);
    count("bin_size", &ExperimentConfig::bin_size);
    count("threads", &ExperimentConfig::threads);
    return t;
  }();
  return table;
}

}  // namespace

std::size_t ExperimentConfig::effective_trial_limit() const {
  if (trial_limit) return *trial_limit;
  return architecture == Architecture::kSingleDirect ? 3000 : 1200;
}

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> s(30);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i + 1;
  return s;
}

int ExperimentConfig::effective_reward_sign() const {
  if (reward_sign) return *reward_sign;
  return reward_mode == ReinforcementMode::kDistanceCost ? -1 : +1;
}

PhysicsParams ExperimentConfig::physics() const {
  PhysicsParams p = PhysicsParams::at_servo_rate(servo_rate_hz);
  p.m_cart = m_cart;
  p.m_pole = m_pole;
  p.pole_len = pole_len;
  p.gravity = gravity;
  p.force_scale = force_scale;
  return p;
}

Bounds ExperimentConfig::bounds() const {
  return {x_range, deg_to_rad(theta_range_deg)};
}

AgentParams ExperimentConfig::agent_params() const {
  AgentParams a;
  a.td = {gamma, critic_lr, action_lr};
  a.momentum = momentum;
  a.noise.sigma = sigma;
  a.terminal = terminal;
  a.init_scale = init_scale;
  a.model_lr = model_lr;
  a.k_m = k_m;
  a.action_limit = action_limit;
  return a;
}

void ExperimentConfig::validate() const {
  if (!(servo_rate_hz > 0.0)) throw ConfigError("servo_rate_hz: must be > 0");
  if (trial_limit && *trial_limit < 1) throw ConfigError("trial_limit: must be >= 1");
  if (success_steps < 1) throw ConfigError("success_steps: must be >= 1");
  physics().validate();
  bounds().validate();
  agent_params().td.validate();
  if (hl_gamma && !(*hl_gamma > 0.0 && *hl_gamma < 1.0))
    throw ConfigError("hl_gamma: must lie in (0, 1)");
  if (hl_action_lr && !(*hl_action_lr > 0.0)) throw ConfigError("hl_action_lr: must be > 0");
  if (hl_critic_lr && !(*hl_critic_lr > 0.0)) throw ConfigError("hl_critic_lr: must be > 0");
  if (hl_sigma && *hl_sigma < 0.0) throw ConfigError("hl_sigma: must be >= 0");
  if (hl_init_scale && !(*hl_init_scale > 0.0)) throw ConfigError("hl_init_scale: must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum: must lie in [0, 1)");
  if (sigma < 0.0) throw ConfigError("sigma: must be >= 0");
  if (!(action_limit >= 0.0)) throw ConfigError("action_limit: must be >= 0");
  if (!(model_lr > 0.0)) throw ConfigError("model_lr: must be > 0");
  if (!(init_fraction >= 0.0 && init_fraction <= 1.0))
    throw ConfigError("init_fraction: must lie in [0, 1]");
  if (n_ratio < 2) throw ConfigError("n_ratio: must be >= 2");
  if (!(k1 > 0.0)) throw ConfigError("k1: must be > 0");
  if (!(k2 > 0.0)) throw ConfigError("k2: must be > 0");
}

void apply_setting(ExperimentConfig& config, std::string_view key,
                   std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end())
    throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second(config, key, value);
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_setting(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_profile(ExperimentConfig& config, std::string_view profile) {
  if (profile == "desk") {
    config.success_steps = 5000;
    config.trial_limit = 400;
    config.seeds.clear();
    for (std::uint64_t s = 1; s <= 10; ++s) config.seeds.push_back(s);
  } else if (profile == "paper") {
    config.success_steps = 20000;
    config.trial_limit.reset();
    config.seeds.clear();
    const std::uint64_t n = config.is_two_level() ? 10 : 30;
    for (std::uint64_t s = 1; s <= n; ++s) config.seeds.push_back(s);
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "' (desk|paper)");
  }
}

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::kSingleIndirect: return "SingleIndirect";
    case Architecture::kSingleDirect: return "SingleDirect";
    case Architecture::kTwoLevelIndirect: return "TwoLevelIndirect";
    case Architecture::kTwoLevelDirect: return "TwoLevelDirect";
  }
  return "?";
}

std::string to_string(LLMode m) {
  return m == LLMode::kExplicitRole ? "ExplicitRole" : "RI";
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(',', pos), text.size());
    const auto item = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    // "a-b" expands to an inclusive range.
    const auto dash = item.find('-', 1);
    auto parse = [](std::string_view s) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("bad seed '" + std::string(s) + "'");
      return v;
    };
    if (dash != std::string_view::npos) {
      const auto lo = parse(trim(item.substr(0, dash)));
      const auto hi = parse(trim(item.substr(dash + 1)));
      if (hi < lo) throw ConfigError("bad seed range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse(item));
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

}  // namespace bac
