#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/memory.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/unordered_map.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>
#include <nlohmann/json.hpp>

#include "ghsim/cli/config.hpp"
#include "ghsim/ingest/slice.hpp"
#include "ghsim/models/bayesian.hpp"
#include "ghsim/models/lpe.hpp"
#include "ghsim/models/newentity.hpp"
#include "ghsim/models/stationary.hpp"

namespace ghsim::cli {

inline constexpr int kSnapshotVersion = 1;
inline constexpr std::string_view kSnapshotFormat = "ghsim-snapshot";

enum class ModelKind { Null, Baseline, Ground, Preferential, Lpe, Bayes };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Null: return "null";
    case ModelKind::Baseline: return "baseline";
    case ModelKind::Ground: return "ground";
    case ModelKind::Preferential: return "pref";
    case ModelKind::Lpe: return "lpe";
    case ModelKind::Bayes: return "bayes";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::Null, ModelKind::Baseline, ModelKind::Ground, ModelKind::Preferential, ModelKind::Lpe,
                 ModelKind::Bayes})
    if (s == to_string(k)) return k;
  fail(ErrorCode::Config, "unknown model '" + std::string(s) + "'");
}

/// A fitted model plus what the simulator needs to rebuild its training slice.
/// The null model is materialized at simulate time, once the window is known.
struct Snapshot {
  ModelKind kind = ModelKind::Baseline;
  TimeWindow window;
  std::vector<Event> events;  // everything before window.end
  Metadata meta;
  std::string config_hash;
  std::shared_ptr<const AgentModel> model;
  std::shared_ptr<const NewEntityModel> wrapper;

  nlohmann::json header() const {
    return {{"format", std::string(kSnapshotFormat)},
            {"version", kSnapshotVersion},
            {"model", std::string(to_string(kind))},
            {"window", format_window(window)},
            {"new_entity", wrapper != nullptr},
            {"config_hash", config_hash}};
  }

  TrainingSlice slice() const { return build_slice(EventLog(events), window, meta); }

  /// The model to simulate over `sim_window`.
  std::shared_ptr<const AgentModel> simulation_model(const TimeWindow& sim_window) const {
    if (kind == ModelKind::Null)
      return std::make_shared<NullModel>(NullModel::fit(EventLog(events), sim_window));
    if (wrapper) return wrapper;
    return model;
  }
};

namespace detail {

template <class M, class Archive>
std::shared_ptr<const M> load_model(Archive& ar) {
  auto m = std::make_shared<M>();
  ar(*m);
  return m;
}

}  // namespace detail

/// Fits `kind` on `log` restricted to `window`.
inline Snapshot fit_snapshot(ModelKind kind, const EventLog& log, TimeWindow window, Metadata meta, const Config& cfg) {
  Snapshot s;
  s.kind = kind;
  s.window = window;
  s.meta = std::move(meta);
  s.config_hash = config_hash(cfg);
  for (const auto& e : log) {
    if (e.time >= window.end) break;
    s.events.push_back(e);
  }
  const auto slice = s.slice();
  switch (kind) {
    case ModelKind::Null: return s;
    case ModelKind::Baseline:
      s.model = std::make_shared<StationaryModel>(StationaryModel::fit(slice, StationaryKind::Baseline));
      break;
    case ModelKind::Ground:
      s.model = std::make_shared<StationaryModel>(StationaryModel::fit(slice, StationaryKind::GroundEvent));
      break;
    case ModelKind::Preferential: {
      PreferentialOptions po;
      po.max_neighbors = cfg.preferential_max_neighbors;
      s.model = std::make_shared<StationaryModel>(StationaryModel::fit(slice, StationaryKind::Preferential, po));
      break;
    }
    case ModelKind::Lpe: s.model = std::make_shared<LpeModel>(LpeModel::fit(slice, cfg.lpe_options())); break;
    case ModelKind::Bayes: s.model = std::make_shared<BayesianModel>(BayesianModel::fit(slice, cfg.bayesian_options())); break;
  }
  if (cfg.new_entity_p_explore > 0)
    s.wrapper = std::make_shared<NewEntityModel>(NewEntityModel::fit(s.model, slice, cfg.new_entity_options()));
  return s;
}

/// One JSON header line, then a portable binary payload.
inline void write_snapshot(std::ostream& out, const Snapshot& s) {
  out << s.header().dump() << '\n';
  cereal::PortableBinaryOutputArchive ar(out);
  ar(s.events, s.window, s.meta);
  switch (s.kind) {
    case ModelKind::Null: break;
    case ModelKind::Baseline:
    case ModelKind::Ground:
    case ModelKind::Preferential: ar(static_cast<const StationaryModel&>(*s.model)); break;
    case ModelKind::Lpe: ar(static_cast<const LpeModel&>(*s.model)); break;
    case ModelKind::Bayes: ar(static_cast<const BayesianModel&>(*s.model)); break;
  }
  if (s.wrapper) ar(*s.wrapper);
}

inline void save_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  write_snapshot(out, s);
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::SnapshotMismatch, "empty snapshot");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::SnapshotMismatch, "snapshot header is not JSON");
  }
  if (!h.is_object() || h.value("format", "") != kSnapshotFormat)
    fail(ErrorCode::SnapshotMismatch, "not a snapshot file");
  if (h.value("version", -1) != kSnapshotVersion)
    fail(ErrorCode::SnapshotMismatch, "snapshot version " + h.value("version", nlohmann::json(nullptr)).dump() +
                                          ", this build reads version " + std::to_string(kSnapshotVersion));
  Snapshot s;
  try {
    s.kind = parse_model_kind(h.at("model").get<std::string>());
    s.config_hash = h.value("config_hash", "");
    cereal::PortableBinaryInputArchive ar(in);
    ar(s.events, s.window, s.meta);
    switch (s.kind) {
      case ModelKind::Null: break;
      case ModelKind::Baseline:
      case ModelKind::Ground:
      case ModelKind::Preferential: s.model = detail::load_model<StationaryModel>(ar); break;
      case ModelKind::Lpe: s.model = detail::load_model<LpeModel>(ar); break;
      case ModelKind::Bayes: s.model = detail::load_model<BayesianModel>(ar); break;
    }
    if (h.value("new_entity", false)) {
      auto w = std::make_shared<NewEntityModel>();
      ar(*w);
      w->set_base(s.model);
      s.wrapper = std::move(w);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::SnapshotMismatch, std::string("corrupt snapshot payload: ") + e.what());
  }
  return s;
}

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return read_snapshot(in);
}

}  // namespace ghsim::cli
