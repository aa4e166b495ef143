#pragma once

#include <string>

#include "eigencurve/session.hpp"

namespace eigencurve {

/// A session holding the flow reference, interval and tracker settings only.
Session make_session(const FlowRef& flow, double t0, double tf, const ZNNConfig& cfg,
                     Provenance tracker = Provenance::Znn);

/// Traces all curves on the session interval, clearing every derived field.
void run_trace(Session& s, const ProgressFn& progress = {});

/// Near-approach table for every flow; crossings and R1 for real traces.
void run_analyze(Session& s);

/// Labels from R1 with the current Touch list applied. Returns caveats, e.g.
/// that a crossing-free interval yields only an upper bound on decomposability.
std::vector<std::string> run_infer(Session& s);

/// Replaces the Touch list and re-infers. On TouchError the session is unchanged.
void run_touch(Session& s, const TouchList& touch);

/// Re-traces on an enlarged interval, re-runs the completed stages and carries
/// Touch rows over by matching curves at the old t0. Returns the notices also
/// archived in the new history entry.
std::vector<std::string> extend_interval(Session& s, double new_t0, double new_tf, const ProgressFn& progress = {});

/// Maps old curve indices (ordering at the old t0) to curve indices of `fresh`,
/// by optimal matching of values at the sample nearest the old t0. Entries are 0
/// where the match is ambiguous.
std::vector<int> remap_curves(const TraceSet& old_traces, const TraceSet& fresh, double old_t0);

/// Plot payload: curves, crossing markers, near-approach markers, ve and blocks.
std::string plot_data_json(const Session& s, int indent = -1);

std::string suggestions_json(const Session& s, const TouchOptions& options = {}, int indent = -1);

}  // namespace eigencurve
