#include "vid/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vid/errors.hpp"

namespace vid {

void SamplerConfig::validate() const {
    if (clip_len < 2) throw ConfigError("sampler: clip_len must be >= 2");
    if (inc_min < 1) throw ConfigError("sampler: inc_min must be >= 1");
    if (inc_max < inc_min) throw ConfigError("sampler: inc_max must be >= inc_min");
    if (num_subclips < 2) throw ConfigError("sampler: num_subclips must be >= 2");
    if (clip_len < num_subclips) throw ConfigError("sampler: clip_len must be >= num_subclips");
}

std::vector<int> SubClipPlan::frame_indices() const {
    std::vector<int> idx(static_cast<std::size_t>(length));
    std::iota(idx.begin(), idx.end(), start);
    return idx;
}

std::vector<int> IncoherentSample::frame_indices() const {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(total_len));
    for (const auto& sc : subclips) {
        const auto part = sc.frame_indices();
        idx.insert(idx.end(), part.begin(), part.end());
    }
    return idx;
}

void IncoherentSample::validate(const SamplerConfig& cfg, int raw_len) const {
    if (static_cast<int>(subclips.size()) != cfg.num_subclips)
        throw InfeasibleError("sample: wrong sub-clip count");
    if (loc_labels.size() != subclips.size() - 1 || len_labels.size() != subclips.size() - 1)
        throw InfeasibleError("sample: label count must equal junction count");

    int sum = 0;
    int rel_pos = 0;
    for (std::size_t j = 0; j < subclips.size(); ++j) {
        const auto& sc = subclips[j];
        if (sc.length < 1) throw InfeasibleError("sample: empty sub-clip");
        if (sc.start < 1 || sc.last() > raw_len) throw InfeasibleError("sample: sub-clip outside raw video");
        sum += sc.length;
        if (j > 0) {
            const int gap = sc.start - subclips[j - 1].last() - 1;
            if (gap < cfg.inc_min || gap > cfg.inc_max)
                throw InfeasibleError("sample: junction gap outside [inc_min, inc_max]");
            if (len_labels[j - 1] != gap - cfg.inc_min) throw InfeasibleError("sample: len label mismatch");
            if (loc_labels[j - 1] != rel_pos - 1) throw InfeasibleError("sample: loc label mismatch");
        }
        rel_pos += sc.length;
    }
    if (sum != cfg.clip_len || total_len != cfg.clip_len)
        throw InfeasibleError("sample: lengths do not sum to clip_len");
}

LocationSplit select_location(const SamplerConfig& cfg, RngStream& rng) {
    cfg.validate();
    const int l1 = static_cast<int>(rng.uniform_int(1, cfg.clip_len - 1));
    return {l1, cfg.clip_len - l1, l1 - 1};
}

IndexRange range_first(const SamplerConfig& cfg, int raw_len, int l2) {
    cfg.validate();
    if (raw_len < cfg.clip_len + cfg.inc_min)
        throw InfeasibleError("raw video too short: need at least " +
                              std::to_string(cfg.clip_len + cfg.inc_min) + " frames, got " +
                              std::to_string(raw_len));
    return {1, raw_len - cfg.inc_min - l2};
}

SubClipPlan sample_within(const IndexRange& range, int len, RngStream& rng) {
    const int start_hi = range.hi - len + 1;
    if (start_hi < range.lo)
        throw InfeasibleError("no admissible placement for a sub-clip of length " + std::to_string(len));
    const int start = static_cast<int>(rng.uniform_int(range.lo, start_hi));
    return {start, len};
}

SubClipPlan sample_first(const IndexRange& range, int l1, RngStream& rng) {
    return sample_within(range, l1, rng);
}

IndexRange range_second(const SamplerConfig& cfg, int raw_len, int m1, int l2) {
    cfg.validate();
    if (m1 + cfg.inc_min + l2 > raw_len)
        throw InfeasibleError("second sub-clip infeasible: first sub-clip ends too late");
    return {m1 + cfg.inc_min + 1, std::min(m1 + cfg.inc_max + l2, raw_len)};
}

SubClipPlan sample_second(const IndexRange& range, int l2, RngStream& rng) {
    return sample_within(range, l2, rng);
}

IncoherentSample assemble(std::string source_id, const SubClipPlan& first, const SubClipPlan& second,
                          const SamplerConfig& cfg) {
    cfg.validate();
    if (first.last() >= second.start)
        throw InfeasibleError("assemble: sub-clips overlap or are out of order");
    const int gap = second.start - first.last() - 1;
    if (gap < cfg.inc_min || gap > cfg.inc_max)
        throw InfeasibleError("assemble: gap " + std::to_string(gap) + " outside [" +
                              std::to_string(cfg.inc_min) + ", " + std::to_string(cfg.inc_max) + "]");
    if (first.length + second.length != cfg.clip_len)
        throw InfeasibleError("assemble: sub-clip lengths do not sum to clip_len");

    IncoherentSample s;
    s.source_id = std::move(source_id);
    s.subclips = {first, second};
    s.loc_labels = {first.length - 1};
    s.len_labels = {gap - cfg.inc_min};
    s.total_len = cfg.clip_len;
    return s;
}

namespace {

// Uniform composition of clip_len into k positive parts: k-1 distinct cut
// points drawn from {1,...,clip_len-1} (Fisher-Yates prefix).
std::vector<int> split_lengths(const SamplerConfig& cfg, RngStream& rng) {
    const int k = cfg.num_subclips;
    if (k == 2)
        return {0};  // placeholder, two-sub-clip case handled by select_location
    std::vector<int> cuts(static_cast<std::size_t>(cfg.clip_len - 1));
    std::iota(cuts.begin(), cuts.end(), 1);
    for (int i = 0; i < k - 1; ++i) {
        const int j = static_cast<int>(rng.uniform_int(i, static_cast<int>(cuts.size()) - 1));
        std::swap(cuts[i], cuts[j]);
    }
    cuts.resize(static_cast<std::size_t>(k - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> lens;
    int prev = 0;
    for (int c : cuts) {
        lens.push_back(c - prev);
        prev = c;
    }
    lens.push_back(cfg.clip_len - prev);
    return lens;
}

IncoherentSample generate_k(const SamplerConfig& cfg, int raw_len, std::string source_id,
                            const std::vector<int>& lens, RngStream& rng) {
    const int k = static_cast<int>(lens.size());
    IncoherentSample s;
    s.source_id = std::move(source_id);
    s.total_len = cfg.clip_len;

    int prev_end = 0;  // last frame of the previous sub-clip, 0 before the first
    int remaining = cfg.clip_len;
    for (int j = 0; j < k; ++j) {
        remaining -= lens[static_cast<std::size_t>(j)];
        const int gaps_after = k - 1 - j;
        // Last admissible position for this sub-clip's final frame.
        const int hi = raw_len - remaining - gaps_after * cfg.inc_min;
        const int start_lo = (j == 0) ? 1 : prev_end + cfg.inc_min + 1;
        const int start_hi =
            (j == 0) ? hi - lens[0] + 1
                     : std::min(prev_end + cfg.inc_max + 1, hi - lens[static_cast<std::size_t>(j)] + 1);
        if (start_hi < start_lo) throw InfeasibleError("generate: empty placement interval");
        const int start = static_cast<int>(rng.uniform_int(start_lo, start_hi));
        const SubClipPlan plan{start, lens[static_cast<std::size_t>(j)]};
        if (j > 0) {
            s.loc_labels.push_back(cfg.clip_len - remaining - lens[static_cast<std::size_t>(j)] - 1);
            s.len_labels.push_back(plan.start - prev_end - 1 - cfg.inc_min);
        }
        s.subclips.push_back(plan);
        prev_end = plan.last();
    }
    return s;
}

}  // namespace

IncoherentSample generate(const SamplerConfig& cfg, int raw_len, std::string source_id, RngStream& rng) {
    cfg.validate();
    if (raw_len < cfg.min_raw_len())
        throw InfeasibleError("raw video too short: need at least " + std::to_string(cfg.min_raw_len()) +
                              " frames, got " + std::to_string(raw_len));

    if (cfg.num_subclips == 2) {
        const LocationSplit split = select_location(cfg, rng);
        const IndexRange t1 = range_first(cfg, raw_len, split.l2);
        const SubClipPlan first = sample_first(t1, split.l1, rng);
        const IndexRange t2 = range_second(cfg, raw_len, first.last(), split.l2);
        const SubClipPlan second = sample_second(t2, split.l2, rng);
        return assemble(std::move(source_id), first, second, cfg);
    }
    const auto lens = split_lengths(cfg, rng);
    return generate_k(cfg, raw_len, std::move(source_id), lens, rng);
}

namespace {

void enumerate_rec(const SamplerConfig& cfg, int raw_len, int consumed, int prev_end,
                   std::vector<SubClipPlan>& partial, std::vector<IncoherentSample>& out,
                   std::size_t max_tuples, std::size_t& visited) {
    const int k = cfg.num_subclips;
    const int placed = static_cast<int>(partial.size());
    if (placed == k) {
        IncoherentSample s;
        s.source_id = "";
        s.subclips = partial;
        s.total_len = cfg.clip_len;
        int rel = 0;
        for (int j = 0; j + 1 < k; ++j) {
            rel += partial[static_cast<std::size_t>(j)].length;
            s.loc_labels.push_back(rel - 1);
            s.len_labels.push_back(partial[static_cast<std::size_t>(j + 1)].start -
                                   partial[static_cast<std::size_t>(j)].last() - 1 - cfg.inc_min);
        }
        s.validate(cfg, raw_len);
        out.push_back(std::move(s));
        return;
    }

    const int remaining_subclips = k - placed;
    // This sub-clip can take any length that leaves >= 1 frame per later sub-clip.
    const int max_len = cfg.clip_len - consumed - (remaining_subclips - 1);
    for (int len = 1; len <= max_len; ++len) {
        if (placed == k - 1 && consumed + len != cfg.clip_len) continue;
        const int lo = (placed == 0) ? 1 : prev_end + cfg.inc_min + 1;
        const int hi_gap = (placed == 0) ? raw_len : prev_end + cfg.inc_max + 1;
        for (int start = lo; start <= hi_gap; ++start) {
            if (++visited > max_tuples)
                throw std::length_error("enumerate_valid: exceeded tuple budget");
            const int end = start + len - 1;
            if (end > raw_len) break;
            // All later sub-clips plus their minimum gaps must still fit.
            const int reserve = (cfg.clip_len - consumed - len) + (remaining_subclips - 1) * cfg.inc_min;
            if (end + reserve > raw_len) break;
            partial.push_back({start, len});
            enumerate_rec(cfg, raw_len, consumed + len, end, partial, out, max_tuples, visited);
            partial.pop_back();
        }
    }
}

}  // namespace

std::vector<IncoherentSample> enumerate_valid(const SamplerConfig& cfg, int raw_len, std::size_t max_tuples) {
    cfg.validate();
    std::vector<IncoherentSample> out;
    if (raw_len < cfg.min_raw_len()) return out;
    std::vector<SubClipPlan> partial;
    std::size_t visited = 0;
    enumerate_rec(cfg, raw_len, 0, 0, partial, out, max_tuples, visited);
    return out;
}

std::vector<int> sample_key(const IncoherentSample& s) {
    return s.frame_indices();
}

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ';';
        os << v[i];
    }
    return os.str();
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string part;
    while (std::getline(is, part, ';')) out.push_back(std::stoi(part));
    if (out.empty()) throw FormatError("plan line: empty label field");
    return out;
}

}  // namespace

std::string to_plan_line(const IncoherentSample& s, const SamplerConfig& cfg) {
    if (s.source_id.find(',') != std::string::npos)
        throw FormatError("plan line: source_id must not contain commas");
    std::ostringstream os;
    os << s.source_id << ',' << cfg.clip_len << ',' << cfg.num_subclips << ',' << join_ints(s.loc_labels)
       << ',' << join_ints(s.len_labels);
    for (const auto& sc : s.subclips) os << ',' << sc.start << '-' << sc.last();
    return os.str();
}

IncoherentSample parse_plan_line(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream is(line);
    std::string f;
    while (std::getline(is, f, ',')) fields.push_back(f);
    if (fields.size() < 7) throw FormatError("plan line: expected at least 7 fields");

    IncoherentSample s;
    try {
        s.source_id = fields[0];
        const int l0 = std::stoi(fields[1]);
        const int k = std::stoi(fields[2]);
        if (static_cast<int>(fields.size()) != 5 + k) throw FormatError("plan line: wrong range count");
        s.loc_labels = split_ints(fields[3]);
        s.len_labels = split_ints(fields[4]);
        for (int j = 0; j < k; ++j) {
            const std::string& r = fields[static_cast<std::size_t>(5 + j)];
            const auto dash = r.find('-');
            if (dash == std::string::npos) throw FormatError("plan line: bad range " + r);
            const int lo = std::stoi(r.substr(0, dash));
            const int hi = std::stoi(r.substr(dash + 1));
            if (hi < lo) throw FormatError("plan line: bad range " + r);
            s.subclips.push_back({lo, hi - lo + 1});
        }
        s.total_len = l0;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        throw FormatError("plan line: malformed numeric field in '" + line + "'");
    }
    return s;
}

}  // namespace vid
