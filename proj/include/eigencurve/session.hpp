#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eigencurve/decomposition.hpp"
#include "eigencurve/gallery.hpp"

namespace eigencurve {

inline constexpr const char* kSessionVersion = "1";

struct HistoryEntry {
  double t0 = 0.0;
  double tf = 0.0;
  std::optional<LabelVector> ve;
  TouchList touch;
  std::vector<std::string> notices;  // remapping and dropped-row notes of the extension

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct Session {
  FlowRef flow;
  double t0 = 0.0;
  double tf = 1.0;
  ZNNConfig cfg;
  Provenance tracker = Provenance::Znn;
  TraceSet traces;
  std::optional<CrossingSet> crossings;
  std::optional<R1Matrix> r1;
  std::optional<NearApproachTable> rc;
  TouchList touch;
  std::optional<LabelVector> ve;
  std::optional<BlockStructure> blocks;
  std::vector<HistoryEntry> history;
  std::vector<std::string> notices;

  int dimension() const { return static_cast<int>(traces.size()); }
  friend bool operator==(const Session&, const Session&) = default;
};

/// Throws FormatError when derived fields disagree (r1 != build_R1(crossings),
/// blocks != block_structure(ve), traces on different grids).
void check_consistency(const Session& s);

/// Serialized session document (JSON text, version "1").
std::string session_to_json(const Session& s, int indent = -1);

/// Parses a session document. Throws FormatError describing the first problem;
/// nothing is returned on failure.
Session session_from_json(const std::string& text);

/// Writes through a temporary file and renames it into place.
void save_session(const Session& s, const std::filesystem::path& path);
Session load_session(const std::filesystem::path& path);

/// One CSV per curve (curve_<k>.csv, header `t,re,im`) in `directory`.
/// Returns the written paths.
std::vector<std::filesystem::path> export_csv(const Session& s, const std::filesystem::path& directory);

std::string format_double(double x);

}  // namespace eigencurve
