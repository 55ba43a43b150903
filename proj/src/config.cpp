#include "liir/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace liir {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config field '" + key + "': expected boolean, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected unsigned integer, got '" + v + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(v, k); }},
        {"out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
        {"scenario",
         [](RunConfig& c, const std::string&, const std::string& v) {
             c.scenarios.clear();
             std::istringstream is(v);
             std::string item;
             while (std::getline(is, item, ',')) {
                 if (!trim(item).empty()) c.scenarios.push_back(scenario_from_string(trim(item)));
             }
             if (c.scenarios.empty()) throw ConfigError("config field 'scenario': empty list");
         }},
        {"train_clips", [](RunConfig& c, const std::string& k, const std::string& v) { c.train_clips = parse_int(v, k); }},
        {"eval_clips", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval_clips = parse_int(v, k); }},
        {"frame_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.frame_size = parse_int(v, k); }},
        {"clip_frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.clip_frames = parse_int(v, k); }},
        {"sprite_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.sprite_size = parse_int(v, k); }},
        {"position",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "none") position_kind_from_string(v);  // validates
             c.position = v;
             (void)k;
         }},
        {"temperature", [](RunConfig& c, const std::string& k, const std::string& v) { c.temperature = parse_double(v, k); }},
        {"warmup_epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.warmup_epochs = parse_int(v, k); }},
        {"inter_epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.inter_epochs = parse_int(v, k); }},
        {"lr_warmup", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_warmup = parse_double(v, k); }},
        {"lr_inter", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_inter = parse_double(v, k); }},
        {"batch_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_int(v, k); }},
        {"lambda_com", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_com = parse_double(v, k); }},
        {"bottleneck_colorspace",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "lab" && v != "rgb") throw ConfigError("config field '" + k + "': expected lab|rgb");
             c.bottleneck_colorspace = v;
         }},
        {"bottleneck_mode",
         [](RunConfig& c, const std::string&, const std::string& v) {
             bottleneck_mode_from_string(v);  // validates
             c.bottleneck_mode = v;
         }},
        {"bottleneck_drop", [](RunConfig& c, const std::string& k, const std::string& v) { c.bottleneck_drop = parse_int(v, k); }},
        {"bottleneck_prob", [](RunConfig& c, const std::string& k, const std::string& v) { c.bottleneck_prob = parse_double(v, k); }},
        {"compact_train", [](RunConfig& c, const std::string& k, const std::string& v) { c.compact_train = parse_bool(v, k); }},
        {"compact_infer", [](RunConfig& c, const std::string& k, const std::string& v) { c.compact_infer = parse_bool(v, k); }},
        {"compact_m", [](RunConfig& c, const std::string& k, const std::string& v) { c.compact_m = parse_int(v, k); }},
        {"compact_var_floor", [](RunConfig& c, const std::string& k, const std::string& v) { c.compact_var_floor = parse_double(v, k); }},
        {"negatives", [](RunConfig& c, const std::string& k, const std::string& v) { c.negatives = parse_bool(v, k); }},
        {"bank_capacity", [](RunConfig& c, const std::string& k, const std::string& v) { c.bank_capacity = parse_int(v, k); }},
        {"bank_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.bank_points = parse_int(v, k); }},
        {"ema_beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.ema_beta = parse_double(v, k); }},
        {"shift_mode",
         [](RunConfig& c, const std::string&, const std::string& v) {
             shift_mode_from_string(v);  // validates
             c.shift_mode = v;
         }},
        {"window_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.window_radius = parse_int(v, k); }},
        {"long_term_refs", [](RunConfig& c, const std::string& k, const std::string& v) { c.long_term_refs = parse_bool(v, k); }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v <= 0) throw ConfigError(std::string("config field '") + name + "' must be positive");
    };
    positive(train_clips, "train_clips");
    positive(eval_clips, "eval_clips");
    positive(frame_size, "frame_size");
    positive(clip_frames, "clip_frames");
    positive(sprite_size, "sprite_size");
    positive(warmup_epochs, "warmup_epochs");
    positive(inter_epochs, "inter_epochs");
    positive(batch_size, "batch_size");
    positive(compact_m, "compact_m");
    positive(bank_capacity, "bank_capacity");
    positive(bank_points, "bank_points");
    if (frame_size % 4 != 0) throw ConfigError("config field 'frame_size' must be divisible by 4");
    if (lr_warmup <= 0 || lr_inter <= 0) throw ConfigError("learning rates must be positive");
    if (lambda_com < 0) throw ConfigError("config field 'lambda_com' must be >= 0");
    if (ema_beta < 0 || ema_beta > 1) throw ConfigError("config field 'ema_beta' must be in [0,1]");
    if (compact_var_floor <= 0) throw ConfigError("config field 'compact_var_floor' must be positive");
    if (clip_frames < 2) throw ConfigError("config field 'clip_frames' must be >= 2");
    bottleneck_spec().validate();
}

ColorSpace RunConfig::train_colorspace() const {
    return bottleneck_colorspace == "lab" ? ColorSpace::Lab : ColorSpace::RGB;
}

BottleneckSpec RunConfig::bottleneck_spec() const {
    BottleneckSpec spec;
    spec.colorspace = train_colorspace();
    spec.mode = bottleneck_mode_from_string(bottleneck_mode);
    spec.drop_count = bottleneck_drop;
    spec.probability = bottleneck_prob;
    return spec;
}

PositionKind RunConfig::position_kind() const {
    if (position == "none") {
        throw ConfigError("position_kind() called with position=none");
    }
    return position_kind_from_string(position);
}

void apply_config_line(RunConfig& cfg, const std::string& raw) {
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("config line is not key=value: '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError("unknown config field '" + key + "'");
    }
    it->second(cfg, key, value);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    RunConfig cfg;
    std::string line;
    while (std::getline(in, line)) apply_config_line(cfg, line);
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const std::string& kv : overrides) apply_config_line(cfg, kv);
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "seed=" << cfg.seed << "\n";
    os << "out_dir=" << cfg.out_dir << "\n";
    os << "scenario=";
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
        os << (i ? "," : "") << to_string(cfg.scenarios[i]);
    os << "\n";
    os << "train_clips=" << cfg.train_clips << "\n";
    os << "eval_clips=" << cfg.eval_clips << "\n";
    os << "frame_size=" << cfg.frame_size << "\n";
    os << "clip_frames=" << cfg.clip_frames << "\n";
    os << "sprite_size=" << cfg.sprite_size << "\n";
    os << "position=" << cfg.position << "\n";
    os << "temperature=" << cfg.temperature << "\n";
    os << "warmup_epochs=" << cfg.warmup_epochs << "\n";
    os << "inter_epochs=" << cfg.inter_epochs << "\n";
    os << "lr_warmup=" << cfg.lr_warmup << "\n";
    os << "lr_inter=" << cfg.lr_inter << "\n";
    os << "batch_size=" << cfg.batch_size << "\n";
    os << "lambda_com=" << cfg.lambda_com << "\n";
    os << "bottleneck_colorspace=" << cfg.bottleneck_colorspace << "\n";
    os << "bottleneck_mode=" << cfg.bottleneck_mode << "\n";
    os << "bottleneck_drop=" << cfg.bottleneck_drop << "\n";
    os << "bottleneck_prob=" << cfg.bottleneck_prob << "\n";
    os << "compact_train=" << (cfg.compact_train ? "true" : "false") << "\n";
    os << "compact_infer=" << (cfg.compact_infer ? "true" : "false") << "\n";
    os << "compact_m=" << cfg.compact_m << "\n";
    os << "compact_var_floor=" << cfg.compact_var_floor << "\n";
    os << "negatives=" << (cfg.negatives ? "true" : "false") << "\n";
    os << "bank_capacity=" << cfg.bank_capacity << "\n";
    os << "bank_points=" << cfg.bank_points << "\n";
    os << "ema_beta=" << cfg.ema_beta << "\n";
    os << "shift_mode=" << cfg.shift_mode << "\n";
    os << "window_radius=" << cfg.window_radius << "\n";
    os << "long_term_refs=" << (cfg.long_term_refs ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace liir
