// SPDX-License-Identifier: Apache-2.0

#include "selfnom/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfnom/channel_gen.hpp"
#include "selfnom/checkpoint.hpp"
#include "selfnom/dataset.hpp"
#include "selfnom/errors.hpp"
#include "selfnom/evaluation.hpp"
#include "selfnom/pf_simulation.hpp"
#include "selfnom/policy.hpp"
#include "selfnom/training.hpp"

namespace selfnom::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingInput : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// One JSON object of the config. Every key read is recorded (with its
// default if absent) for config_echo.json; finish() rejects unread keys.
class Record {
 public:
  Record(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    echo_ = json::object();
  }

  template <typename T>
  T get(const std::string& key, T def) {
    used_.insert(key);
    if (!j_.contains(key)) {
      echo_[key] = def;
      return def;
    }
    T v = convert<T>(j_.at(key), where_ + "." + key);
    echo_[key] = v;
    return v;
  }

  template <typename T>
  T require(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return get<T>(key, T{});
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    T v = convert<T>(j_.at(key), where_ + "." + key);
    echo_[key] = v;
    return v;
  }

  Record sub(const std::string& key) {
    used_.insert(key);
    static const json kEmpty = json::object();
    return Record(j_.contains(key) ? j_.at(key) : kEmpty, where_ + "." + key);
  }

  std::vector<Record> list(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    const json& a = j_.at(key);
    if (!a.is_array() || a.empty()) throw ConfigError(where_ + "." + key + ": expected a non-empty array");
    std::vector<Record> out;
    for (std::size_t i = 0; i < a.size(); ++i)
      out.emplace_back(a[i], where_ + "." + key + "[" + std::to_string(i) + "]");
    return out;
  }

  void put_echo(const std::string& key, json v) { echo_[key] = std::move(v); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

  const json& echo() const { return echo_; }

 private:
  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array() || v.empty() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))
        throw ConfigError(where + ": expected a non-empty array of numbers");
    } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
      if (!v.is_array() || v.empty() ||
          !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_unsigned(); }))
        throw ConfigError(where + ": expected a non-empty array of non-negative integers");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
  json echo_;
};

struct Context {
  fs::path config_dir;
  std::uint64_t seed = 0;
  fs::path out;
  std::size_t workers = 1;
  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("write failed: " + path.string());
}

void write_echo(const Context& ctx, const std::string& command, const Record& rec) {
  json j;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["config"] = rec.echo();
  write_text(ctx.out / "config_echo.json", j.dump(2) + "\n");
}

json load_config(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInput("config file not found: " + path.string());
  std::ifstream is(path);
  if (!is) throw MissingInput("cannot open config file: " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

channel::ArrayGeometry parse_array(Record& r) {
  const std::string kind = r.get<std::string>("kind", "ula");
  const double spacing = r.get<double>("spacing", 0.5);
  channel::ArrayGeometry g;
  if (kind == "ula") {
    g = channel::ArrayGeometry::ula(static_cast<int>(r.require<std::uint64_t>("antennas")), spacing);
  } else if (kind == "upa") {
    g = channel::ArrayGeometry::upa(static_cast<int>(r.require<std::uint64_t>("rows")),
                                    static_cast<int>(r.require<std::uint64_t>("cols")), spacing);
  } else {
    throw ConfigError("array.kind: expected 'ula' or 'upa'");
  }
  r.finish();
  g.validate();
  return g;
}

channel::ChannelModelConfig parse_channel(Record& r) {
  channel::ChannelModelConfig c;
  c.num_clusters = static_cast<int>(r.get<std::uint64_t>("num_clusters", c.num_clusters));
  c.angle_spread_deg = r.get<double>("angle_spread_deg", c.angle_spread_deg);
  c.pathloss_exponent = r.get<double>("pathloss_exponent", c.pathloss_exponent);
  c.cell_radius_m = r.get<double>("cell_radius_m", c.cell_radius_m);
  c.min_distance_m = r.get<double>("min_distance_m", c.min_distance_m);
  c.bs_height_m = r.get<double>("bs_height_m", c.bs_height_m);
  c.ue_height_m = r.get<double>("ue_height_m", c.ue_height_m);
  c.sector_half_width_deg = r.get<double>("sector_half_width_deg", c.sector_half_width_deg);
  c.shadowing_std_db = r.get<double>("shadowing_std_db", c.shadowing_std_db);
  c.rayleigh_mode = r.get<bool>("rayleigh", c.rayleigh_mode);
  r.finish();
  c.validate();
  return c;
}

// Parses the "array" and "channel" sub-records and echoes them.
channel::ChannelModel parse_model(Record& rec) {
  Record ar = rec.sub("array");
  Record cr = rec.sub("channel");
  const channel::ArrayGeometry g = parse_array(ar);
  const channel::ChannelModelConfig c = parse_channel(cr);
  rec.put_echo("array", ar.echo());
  rec.put_echo("channel", cr.echo());
  return channel::ChannelModel(g, c);
}

channel::Dataset load_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInput("dataset not found: " + path.string());
  return channel::read_dataset(path);
}

template <typename E, typename F>
E parse_enum(const std::string& s, F&& from_string, const std::string& where) {
  try {
    return from_string(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

int cmd_gen_data(const Context& ctx, const json& root) {
  Record rec(root.at("gen_data"), "gen_data");
  const channel::ChannelModel model = parse_model(rec);
  channel::DatasetSpec spec;
  spec.pool_size = rec.require<std::uint64_t>("pool_size");
  spec.num_sets = rec.require<std::uint64_t>("num_sets");
  spec.users_per_set = rec.require<std::uint64_t>("users_per_set");
  if (auto v = rec.optional<std::uint64_t>("num_train")) spec.num_train = *v;
  if (auto v = rec.optional<std::uint64_t>("num_test")) spec.num_test = *v;
  spec.seed = ctx.seed;
  rec.finish();

  const channel::Dataset ds = channel::build_dataset(spec, model, ctx.workers);
  const fs::path file = ctx.out / "dataset.snch";
  channel::write_dataset(file, ds);
  json side;
  side["format"] = "SNCH";
  side["num_antennas"] = ds.num_antennas;
  side["pool_size"] = ds.pool.size();
  side["num_sets"] = ds.sets.size();
  side["users_per_set"] = ds.users_per_set;
  side["num_train"] = ds.num_train;
  side["num_test"] = ds.num_test;
  side["seed"] = ctx.seed;
  side["gain_normalization"] = model.gain_normalization();
  side["array"] = rec.echo().at("array");
  side["channel"] = rec.echo().at("channel");
  write_text(ctx.out / "dataset.snch.json", side.dump(2) + "\n");
  write_echo(ctx, "gen-data", rec);
  return kExitOk;
}

double train_feature_scale(const channel::Dataset& ds) {
  std::vector<mimo::ChannelVector> seen;
  for (const auto& set : ds.train_sets())
    for (auto id : set) seen.push_back(ds.pool[id]);
  if (seen.empty()) return policy::feature_scale_from_pool(ds.pool);
  return policy::feature_scale_from_pool(seen);
}

int cmd_train(const Context& ctx, const json& root) {
  Record rec(root.at("train"), "train");
  const fs::path ds_path = ctx.resolve(rec.require<std::string>("dataset"));
  train::TrainConfig cfg;
  cfg.method = rec.get<std::string>("method", "pg") == "do" ? TrainMethod::Do : TrainMethod::Pg;
  {
    const std::string m = rec.echo().at("method");
    if (m != "do" && m != "pg") throw ConfigError("train.method: expected 'do' or 'pg'");
  }
  cfg.scheduler = parse_enum<sched::SchedulerKind>(rec.get<std::string>("scheduler", "random"),
                                                   sched::scheduler_from_string, "train.scheduler");
  cfg.sus_alpha = rec.get<double>("sus_alpha", cfg.sus_alpha);
  cfg.policy.input_mode = parse_enum<policy::InputMode>(rec.get<std::string>("input_mode", "full_csi"),
                                                        policy::input_mode_from_string, "train.input_mode");
  cfg.policy.pf_aware = rec.get<bool>("pf_training", false);
  cfg.policy.gamma = rec.get<double>("gamma", cfg.policy.gamma);
  cfg.n_fb = rec.require<double>("n_fb");
  cfg.m_max = rec.require<std::uint64_t>("m_max");
  const auto total_ues = rec.optional<std::uint64_t>("total_ues");
  cfg.alpha_p = rec.get<double>("alpha_p", cfg.alpha_p);
  cfg.alpha_d = rec.get<double>("alpha_d", cfg.alpha_d);
  cfg.batch_size = rec.get<std::uint64_t>("batch_size", cfg.batch_size);
  cfg.epochs = rec.get<std::uint64_t>("epochs", cfg.epochs);
  cfg.total_power = rec.get<double>("P", cfg.total_power);
  cfg.noise_power = rec.get<double>("sigma2", cfg.noise_power);
  cfg.baseline = rec.get<bool>("baseline", cfg.baseline);
  const std::string opt = rec.get<std::string>("optimizer", "sgd");
  if (opt == "sgd") cfg.optimizer = nn::OptimizerKind::Sgd;
  else if (opt == "momentum") cfg.optimizer = nn::OptimizerKind::Momentum;
  else if (opt == "adam") cfg.optimizer = nn::OptimizerKind::Adam;
  else throw ConfigError("train.optimizer: expected 'sgd', 'momentum' or 'adam'");
  cfg.lambda0 = rec.get<double>("lambda0", cfg.lambda0);
  const auto resume = rec.optional<std::string>("resume");
  const bool wall = rec.get<bool>("record_wall_time", false);
  cfg.seed = ctx.seed;
  rec.finish();

  const channel::Dataset ds = load_dataset(ds_path);
  cfg.total_ues = total_ues ? *total_ues : ds.users_per_set;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  train::TrainerState state =
      resume ? train::resume_state(read_checkpoint(ctx.resolve(*resume)), cfg, ds.num_antennas)
             : train::initial_state(cfg, ds.num_antennas, train_feature_scale(ds));
  train::train(state, cfg, ds, {ctx.workers, wall});

  write_checkpoint(ctx.out / "checkpoint.snck", train::to_checkpoint(state, cfg));
  std::ostringstream csv;
  csv << "epoch,batch,rate_term,mean_feedback_count,lambda,wall_time_ms\n";
  for (const auto& r : state.history)
    csv << r.epoch << ',' << r.batch << ',' << fmt(r.rate_term) << ',' << fmt(r.mean_feedback_count) << ','
        << fmt(r.lambda) << ',' << fmt(r.wall_time_ms) << '\n';
  write_text(ctx.out / "metrics.csv", csv.str());
  write_echo(ctx, "train", rec);
  if (state.batches > 0 && static_cast<double>(state.rank_deficient_batches) >
                               kRankDeficientBatchLimit * static_cast<double>(state.batches))
    throw NumericalFailure(std::to_string(state.rank_deficient_batches) + " of " +
                           std::to_string(state.batches) + " batches had rank-deficient schedules");
  return kExitOk;
}

int cmd_eval(const Context& ctx, const json& root) {
  Record rec(root.at("eval"), "eval");
  const auto default_ds = rec.optional<std::string>("dataset");
  const double p = rec.get<double>("P", 1.0);
  const double sigma2 = rec.get<double>("sigma2", 1.0);
  const double sus_alpha = rec.get<double>("sus_alpha", sched::kDefaultSusAlpha);
  const std::string split = rec.get<std::string>("split", "test");
  if (split != "test" && split != "train") throw ConfigError("eval.split: expected 'test' or 'train'");
  std::vector<Record> points = rec.list("points");

  struct Point {
    double sweep_value;
    std::string label;
    eval::FeedbackPolicy policy;
    std::string checkpoint;
    eval::EvalSetup setup;
    fs::path dataset;
  };
  std::vector<Point> parsed;
  json echo_points = json::array();
  for (auto& pr : points) {
    Point pt;
    pt.sweep_value = pr.require<double>("sweep_value");
    pt.label = pr.require<std::string>("method");
    pt.policy.kind = parse_enum<eval::FeedbackKind>(pr.require<std::string>("feedback"),
                                                    eval::feedback_from_string, "eval.points.feedback");
    pt.policy.prob = pr.get<double>("prob", 0.5);
    if (pt.policy.kind == eval::FeedbackKind::LimitedAll) pt.policy.n_fb = pr.require<std::uint64_t>("n_fb");
    if (pt.policy.kind == eval::FeedbackKind::SelfNomination) pt.checkpoint = pr.require<std::string>("checkpoint");
    pt.setup.scheduler.kind = parse_enum<sched::SchedulerKind>(pr.require<std::string>("scheduler"),
                                                               sched::scheduler_from_string, "eval.points.scheduler");
    pt.setup.scheduler.m_max = pr.require<std::uint64_t>("m_max");
    pt.setup.scheduler.sus_alpha = sus_alpha;
    pt.setup.scheduler.total_power = p;
    pt.setup.scheduler.noise_power = sigma2;
    pt.setup.seed = ctx.seed;
    const auto ds = pr.optional<std::string>("dataset");
    if (!ds && !default_ds) throw ConfigError("eval: point without a dataset and no default dataset");
    pt.dataset = ctx.resolve(ds ? *ds : *default_ds);
    pr.finish();
    echo_points.push_back(pr.echo());
    parsed.push_back(std::move(pt));
  }
  rec.put_echo("points", echo_points);
  rec.finish();

  std::map<fs::path, std::shared_ptr<const channel::Dataset>> datasets;
  std::map<fs::path, std::shared_ptr<const Checkpoint>> checkpoints;
  std::ostringstream csv;
  csv << "sweep_var,method,sum_rate_mean,feedback_count_mean,condition_number_mean,sum_rate_ci95\n";
  for (auto& pt : parsed) {
    auto& ds = datasets[pt.dataset];
    if (!ds) ds = std::make_shared<const channel::Dataset>(load_dataset(pt.dataset));
    if (pt.policy.kind == eval::FeedbackKind::SelfNomination) {
      const fs::path cp = ctx.resolve(pt.checkpoint);
      auto& ck = checkpoints[cp];
      if (!ck) ck = std::make_shared<const Checkpoint>(read_checkpoint(cp));
      pt.policy.checkpoint = ck;
    }
    const auto sets = split == "test" ? ds->test_sets() : ds->train_sets();
    const eval::EvalResult r = eval::evaluate(*ds, sets, pt.policy, pt.setup, ctx.workers);
    csv << fmt(pt.sweep_value) << ',' << pt.label << ',' << fmt(r.sum_rate_mean) << ','
        << fmt(r.feedback_count_mean) << ',' << fmt(r.condition_number_mean) << ',' << fmt(r.sum_rate_ci95)
        << '\n';
  }
  write_text(ctx.out / "sweep.csv", csv.str());
  write_echo(ctx, "eval", rec);
  return kExitOk;
}

int cmd_pf_sim(const Context& ctx, const json& root) {
  Record rec(root.at("pf_sim"), "pf_sim");
  const channel::ChannelModel model = parse_model(rec);
  const std::size_t total_ues = rec.require<std::uint64_t>("total_ues");
  pf::PfRunConfig base;
  base.m_max = rec.require<std::uint64_t>("m_max");
  base.total_power = rec.get<double>("P", 1.0);
  base.noise_power = rec.get<double>("sigma2", 1.0);
  base.layouts = rec.get<std::uint64_t>("layouts", 1);
  base.seed = ctx.seed;
  const auto epsilons = rec.require<std::vector<double>>("epsilons");
  const auto slots = rec.require<std::vector<std::uint64_t>>("slots");
  std::vector<Record> prs = rec.list("policies");
  struct NamedPolicy {
    std::string label;
    eval::FeedbackPolicy policy;
  };
  std::vector<NamedPolicy> policies;
  json echo_pol = json::array();
  for (auto& pr : prs) {
    NamedPolicy np;
    const std::string kind = pr.require<std::string>("kind");
    np.policy.kind = parse_enum<eval::FeedbackKind>(kind, eval::feedback_from_string, "pf_sim.policies.kind");
    np.policy.prob = pr.get<double>("prob", 0.5);
    if (np.policy.kind == eval::FeedbackKind::LimitedAll) np.policy.n_fb = pr.require<std::uint64_t>("n_fb");
    std::string ckpath;
    if (np.policy.kind == eval::FeedbackKind::SelfNomination) ckpath = pr.require<std::string>("checkpoint");
    np.label = pr.get<std::string>("label", kind);
    pr.finish();
    echo_pol.push_back(pr.echo());
    if (!ckpath.empty())
      np.policy.checkpoint = std::make_shared<const Checkpoint>(read_checkpoint(ctx.resolve(ckpath)));
    policies.push_back(std::move(np));
  }
  rec.put_echo("policies", echo_pol);
  rec.finish();
  try {
    base.validate();
    for (double e : epsilons) {
      pf::PfRunConfig c = base;
      c.epsilon = e;
      c.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pf_sim: ") + e.what());
  }
  if (std::find(slots.begin(), slots.end(), 0u) != slots.end()) throw ConfigError("pf_sim.slots: T must be >= 1");

  const pf::LayoutChannelSource source(model, total_ues, base.layouts, ctx.seed);
  std::ostringstream report, summary;
  report << "policy,epsilon,T,layout_id,ue_id,mean_rate\n";
  summary << "policy,epsilon,T,log_utility,mean_feedback_count\n";
  for (const auto& np : policies)
    for (double eps : epsilons)
      for (std::uint64_t t : slots) {
        pf::PfRunConfig c = base;
        c.epsilon = eps;
        c.slots = t;
        const pf::PfRunReport r = pf::run_pf(c, source, np.policy, ctx.workers);
        for (std::size_t l = 0; l < r.mean_rate.size(); ++l)
          for (std::size_t k = 0; k < r.mean_rate[l].size(); ++k)
            report << np.label << ',' << fmt(eps) << ',' << t << ',' << l << ',' << k << ','
                   << fmt(r.mean_rate[l][k]) << '\n';
        summary << np.label << ',' << fmt(eps) << ',' << t << ',' << fmt(pf::log_utility(r).value) << ','
                << fmt(r.mean_feedback_count) << '\n';
      }
  write_text(ctx.out / "pf_report.csv", report.str());
  write_text(ctx.out / "pf_summary.csv", summary.str());
  write_echo(ctx, "pf-sim", rec);
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-nomination feedback for MU-MIMO downlink: data, training, evaluation, PF simulation"};
  app.require_subcommand(1);
  struct Opts {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t workers = 1;
  } o;
  const std::map<std::string, std::string> records = {
      {"gen-data", "gen_data"}, {"train", "train"}, {"eval", "eval"}, {"pf-sim", "pf_sim"}};
  for (const auto& [name, key] : records) {
    auto* sub = app.add_subcommand(name, "run the '" + key + "' record of the config");
    sub->add_option("--config", o.config, "JSON config file")->required();
    sub->add_option("--seed", o.seed, "master seed")->required();
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--workers", o.workers, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  try {
    const fs::path config_path = fs::absolute(o.config);
    const json root = load_config(config_path);
    if (!root.is_object()) throw ConfigError("config root must be an object");
    for (const auto& [k, v] : root.items()) {
      bool known = false;
      for (const auto& [name, key] : records) known = known || k == key;
      if (!known) throw ConfigError("config: unknown top-level key '" + k + "'");
    }
    const std::string key = records.at(command);
    if (!root.contains(key)) throw ConfigError("config has no '" + key + "' record");
    Context ctx{config_path.parent_path(), o.seed, fs::path(o.out), o.workers};
    fs::create_directories(ctx.out);
    if (command == "gen-data") return cmd_gen_data(ctx, root);
    if (command == "train") return cmd_train(ctx, root);
    if (command == "eval") return cmd_eval(ctx, root);
    return cmd_pf_sim(ctx, root);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigMismatch& e) {
    err << "config mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointMismatch& e) {
    err << "checkpoint mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingInput& e) {
    err << "missing input: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const MissingCheckpoint& e) {
    err << "missing input: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const FormatError& e) {
    err << "unreadable input: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace selfnom::cli
