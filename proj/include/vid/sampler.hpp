#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vid/rng.hpp"

namespace vid {

// Configuration for incoherent-clip generation.
//
// An incoherent clip of clip_len frames is assembled from num_subclips
// consecutive runs of raw-video frames, skipping between inc_min and inc_max
// frames at each junction. Frame indices are 1-based throughout.
struct SamplerConfig {
    int clip_len = 16;   // l0, total frames in the assembled clip
    int inc_min = 3;     // minimum skipped frames per junction
    int inc_max = 10;    // maximum skipped frames per junction
    int num_subclips = 2;
    std::uint64_t seed = 0;

    void validate() const;

    int num_loc_classes() const { return clip_len - 1; }
    int num_len_classes() const { return inc_max - inc_min + 1; }
    // Shortest raw video from which a sample can be drawn.
    int min_raw_len() const { return clip_len + (num_subclips - 1) * inc_min; }
};

// Closed range of 1-based frame indices.
struct IndexRange {
    int lo = 1;
    int hi = 1;

    int count() const { return hi - lo + 1; }
    bool contains(int i) const { return lo <= i && i <= hi; }
};

// One sub-clip: `length` consecutive raw-video frames starting at `start`.
struct SubClipPlan {
    int start = 1;
    int length = 1;

    int last() const { return start + length - 1; }
    std::vector<int> frame_indices() const;
};

// A fully assembled incoherent clip: the sub-clip placements plus the labels
// derived from them. For the default two-sub-clip case there is a single
// junction, so loc_labels/len_labels each hold one entry.
struct IncoherentSample {
    std::string source_id;
    std::vector<SubClipPlan> subclips;
    std::vector<int> loc_labels;  // per junction: last clip-relative index of the earlier sub-clip
    std::vector<int> len_labels;  // per junction: skipped frames minus inc_min
    int total_len = 0;

    int loc_label() const { return loc_labels.front(); }
    int len_label() const { return len_labels.front(); }
    // Skipped frames at the first junction.
    int inc_len(const SamplerConfig& cfg) const { return len_labels.front() + cfg.inc_min; }

    // Absolute raw-video indices of the assembled clip, in order.
    std::vector<int> frame_indices() const;

    // Throws unless every structural invariant holds for `cfg` and a raw video
    // of length raw_len: lengths sum to clip_len, sub-clips strictly ordered,
    // junction gaps within [inc_min, inc_max], labels consistent, all indices
    // inside [1, raw_len].
    void validate(const SamplerConfig& cfg, int raw_len) const;
};

struct LocationSplit {
    int l1 = 0;
    int l2 = 0;
    int loc_label = 0;
};

// Uniform draw of the junction location: l1 ~ U{1,...,l0-1}, l2 = l0 - l1.
LocationSplit select_location(const SamplerConfig& cfg, RngStream& rng);

// Admissible positions for the LAST frame of the first sub-clip, reserving
// inc_min skipped frames plus l2 frames for the second sub-clip.
IndexRange range_first(const SamplerConfig& cfg, int raw_len, int l2);

// Place a sub-clip of length `len` uniformly so that it lies inside `range`.
SubClipPlan sample_within(const IndexRange& range, int len, RngStream& rng);

SubClipPlan sample_first(const IndexRange& range, int l1, RngStream& rng);

// Admissible frame positions for the second sub-clip given the last frame m1
// of the first: starts at m1 + inc_min + 1, ends where the gap would exceed
// inc_max (or at the video end).
IndexRange range_second(const SamplerConfig& cfg, int raw_len, int m1, int l2);

SubClipPlan sample_second(const IndexRange& range, int l2, RngStream& rng);

// Combine two placed sub-clips into a labelled sample. The gap is counted in
// skipped frames: gap = min(second) - max(first) - 1.
IncoherentSample assemble(std::string source_id, const SubClipPlan& first, const SubClipPlan& second,
                          const SamplerConfig& cfg);

// End-to-end hierarchical generation. For num_subclips > 2 the same
// reservation rule is applied at every junction: after placing sub-clip j,
// the remaining sub-clip lengths plus inc_min frames per remaining junction
// stay available. Never wraps around the end of the video.
IncoherentSample generate(const SamplerConfig& cfg, int raw_len, std::string source_id, RngStream& rng);

// Brute-force enumeration of every sample satisfying the invariants, by
// exhaustive search over sub-clip lengths and placements. Independent of the
// sampling code paths above; used as the test oracle. Throws if more than
// `max_tuples` candidate tuples would be visited.
std::vector<IncoherentSample> enumerate_valid(const SamplerConfig& cfg, int raw_len,
                                              std::size_t max_tuples = 1000000);

// Canonical key for set comparisons: the absolute frame indices of the clip.
std::vector<int> sample_key(const IncoherentSample& s);

// Line format: source_id,l0,k,L_loc,L_len,lo-hi,lo-hi,...
// Multi-junction labels are ';'-joined inside the L_loc / L_len fields.
std::string to_plan_line(const IncoherentSample& s, const SamplerConfig& cfg);
IncoherentSample parse_plan_line(const std::string& line);

}  // namespace vid
