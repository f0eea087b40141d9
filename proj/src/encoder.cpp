#include "vid/encoder.hpp"

#include <cmath>
#include <sstream>

#include "vid/errors.hpp"

namespace vid {

void EncoderSpec::validate() const {
    if (in_channels < 1) throw ConfigError("encoder: in_channels must be positive");
    if (stages.empty()) throw ConfigError("encoder: at least one stage required");
    for (const auto& s : stages) {
        if (s.out_channels < 1) throw ConfigError("encoder: stage channels must be positive");
        for (int k : s.kernel)
            if (k < 1) throw ConfigError("encoder: kernel dims must be positive");
        for (int st : s.stride)
            if (st < 1) throw ConfigError("encoder: strides must be positive");
        for (int p : s.pad)
            if (p < 0) throw ConfigError("encoder: padding must be non-negative");
    }
}

std::string EncoderSpec::stages_str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& s = stages[i];
        if (i) os << ',';
        os << s.out_channels << ':' << s.kernel[0] << 'x' << s.kernel[1] << 'x' << s.kernel[2] << ':'
           << s.stride[0] << 'x' << s.stride[1] << 'x' << s.stride[2];
    }
    return os.str();
}

std::vector<ConvStage> EncoderSpec::parse_stages(const std::string& text) {
    std::vector<ConvStage> stages;
    std::istringstream is(text);
    std::string part;
    auto parse3 = [](const std::string& s, const char* what) {
        std::array<int, 3> out{};
        std::istringstream ps(s);
        std::string tok;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ps, tok, 'x')) throw FormatError(std::string("encoder stages: bad ") + what);
            out[static_cast<std::size_t>(i)] = std::stoi(tok);
        }
        return out;
    };
    while (std::getline(is, part, ',')) {
        std::istringstream ps(part);
        std::string ch, kern, strides;
        if (!std::getline(ps, ch, ':') || !std::getline(ps, kern, ':') || !std::getline(ps, strides))
            throw FormatError("encoder stages: expected out:ktxkhxkw:stxshxsw");
        ConvStage s;
        try {
            s.out_channels = std::stoi(ch);
            s.kernel = parse3(kern, "kernel");
            s.stride = parse3(strides, "stride");
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception&) {
            throw FormatError("encoder stages: malformed number in '" + part + "'");
        }
        stages.push_back(s);
    }
    if (stages.empty()) throw FormatError("encoder stages: empty spec");
    return stages;
}

EncoderParams init_encoder(ParamStore& store, const EncoderSpec& spec, RngStream& rng) {
    spec.validate();
    EncoderParams enc;
    int cin = spec.in_channels;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const auto& s = spec.stages[i];
        const int fan_in = cin * s.kernel[0] * s.kernel[1] * s.kernel[2];
        const double bound = spec.init_gain * std::sqrt(6.0 / static_cast<double>(fan_in));
        RngStream r = rng.split(i);
        const std::string prefix = "enc.stage" + std::to_string(i);
        const int w = store.add(prefix + ".w", Tensor::uniform({s.out_channels, cin, s.kernel[0],
                                                                s.kernel[1], s.kernel[2]},
                                                               bound, r));
        const int b = store.add(prefix + ".b", Tensor::zeros({s.out_channels}));
        enc.stage_params.emplace_back(w, b);
        cin = s.out_channels;
    }
    return enc;
}

NodeRef encoder_forward(Graph& g, NodeRef clips, const EncoderSpec& spec, const EncoderParams& enc,
                        const std::vector<NodeRef>& params) {
    if (enc.stage_params.size() != spec.stages.size())
        throw ConfigError("encoder: parameter/stage count mismatch");
    NodeRef x = clips;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const auto& s = spec.stages[i];
        const auto [w, b] = enc.stage_params[i];
        x = g.relu(g.conv3d(x, params[static_cast<std::size_t>(w)], params[static_cast<std::size_t>(b)],
                            s.stride, s.pad));
    }
    return g.global_avg_pool(x);
}

}  // namespace vid
