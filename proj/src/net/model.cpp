#include "rosa/net/model.hpp"

#include <cstdint>
#include <fstream>

#include <json.hpp>

namespace rosa::net {

using nlohmann::json;

void ArchConfig::validate() const {
    if (width <= 0 || head_hidden <= 0 || roi_size <= 0)
        throw DataError("arch config: widths must be positive");
    if (num_classes < 2) throw DataError("arch config: need background plus one class");
    if (anchor_scales_s.empty()) throw DataError("arch config: no anchor scales");
    if (level_strides.size() != kNumLevels)
        throw DataError("arch config: expected three pyramid strides");
    for (int s : level_strides)
        if (s <= 0) throw DataError("arch config: strides must be positive");
    if (score_mode != "one_minus_bg" && score_mode != "class")
        throw DataError("arch config: unknown score_mode '" + score_mode + "'");
    if (!(spn_neg_iou <= spn_pos_iou)) throw DataError("arch config: neg IoU above pos IoU");
}

void TrainConfig::validate() const {
    if (epochs <= 0 || crop_frames <= 0 || crops_per_session <= 0 || folds <= 1)
        throw DataError("train config: counts must be positive (folds > 1)");
    if (base_lr <= 0) throw DataError("train config: base_lr must be positive");
    if (momentum < 0 || momentum >= 1) throw DataError("train config: momentum out of range");
    if (event_crop_bias < 0 || event_crop_bias > 1)
        throw DataError("train config: event_crop_bias out of range");
}

static json arch_to_json(const ArchConfig& c) {
    return json{{"width", c.width},
                {"head_hidden", c.head_hidden},
                {"roi_size", c.roi_size},
                {"num_classes", c.num_classes},
                {"max_range_pool", c.max_range_pool},
                {"anchor_scales_s", c.anchor_scales_s},
                {"level_strides", c.level_strides},
                {"spn_pos_iou", c.spn_pos_iou},
                {"spn_neg_iou", c.spn_neg_iou},
                {"proposal_pos_iou", c.proposal_pos_iou},
                {"pre_nms_topk", c.pre_nms_topk},
                {"post_nms_topk", c.post_nms_topk},
                {"proposal_nms_iou", c.proposal_nms_iou},
                {"detect_nms_iou", c.detect_nms_iou},
                {"score_floor", c.score_floor},
                {"min_duration_s", c.min_duration_s},
                {"score_mode", c.score_mode}};
}

static ArchConfig arch_from_json(const json& j) {
    ArchConfig c;
    c.width = j.value("width", c.width);
    c.head_hidden = j.value("head_hidden", c.head_hidden);
    c.roi_size = j.value("roi_size", c.roi_size);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.max_range_pool = j.value("max_range_pool", c.max_range_pool);
    c.anchor_scales_s = j.value("anchor_scales_s", c.anchor_scales_s);
    c.level_strides = j.value("level_strides", c.level_strides);
    c.spn_pos_iou = j.value("spn_pos_iou", c.spn_pos_iou);
    c.spn_neg_iou = j.value("spn_neg_iou", c.spn_neg_iou);
    c.proposal_pos_iou = j.value("proposal_pos_iou", c.proposal_pos_iou);
    c.pre_nms_topk = j.value("pre_nms_topk", c.pre_nms_topk);
    c.post_nms_topk = j.value("post_nms_topk", c.post_nms_topk);
    c.proposal_nms_iou = j.value("proposal_nms_iou", c.proposal_nms_iou);
    c.detect_nms_iou = j.value("detect_nms_iou", c.detect_nms_iou);
    c.score_floor = j.value("score_floor", c.score_floor);
    c.min_duration_s = j.value("min_duration_s", c.min_duration_s);
    c.score_mode = j.value("score_mode", c.score_mode);
    c.validate();
    return c;
}

ArchConfig load_arch_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open arch config: " + path);
    json j;
    try {
        in >> j;
        return arch_from_json(j);
    } catch (const json::exception& e) {
        throw DataError("malformed arch config " + path + ": " + e.what());
    }
}

void save_arch_config(const ArchConfig& cfg, const std::string& path) {
    cfg.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write arch config: " + path);
    out << arch_to_json(cfg).dump(2) << "\n";
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open train config: " + path);
    json j;
    TrainConfig c;
    try {
        in >> j;
        c.epochs = j.value("epochs", c.epochs);
        c.base_lr = j.value("base_lr", c.base_lr);
        c.momentum = j.value("momentum", c.momentum);
        c.crop_frames = j.value("crop_frames", c.crop_frames);
        c.crops_per_session = j.value("crops_per_session", c.crops_per_session);
        c.event_crop_bias = j.value("event_crop_bias", c.event_crop_bias);
        c.seed = j.value("seed", c.seed);
        c.folds = j.value("folds", c.folds);
    } catch (const json::exception& e) {
        throw DataError("malformed train config " + path + ": " + e.what());
    }
    c.validate();
    return c;
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    cfg.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write train config: " + path);
    json j{{"epochs", cfg.epochs},
           {"base_lr", cfg.base_lr},
           {"momentum", cfg.momentum},
           {"crop_frames", cfg.crop_frames},
           {"crops_per_session", cfg.crops_per_session},
           {"event_crop_bias", cfg.event_crop_bias},
           {"seed", cfg.seed},
           {"folds", cfg.folds}};
    out << j.dump(2) << "\n";
}

void save_model(RasaModel<float>& model, const std::string& path) {
    json header;
    header["format"] = "rosa-model-v1";
    header["arch"] = arch_to_json(model.arch);
    header["frame_rate_hz"] = model.frame_rate_hz;
    json blobs = json::array();
    for (auto& [name, p] : model.params())
        blobs.push_back(json{{"name", name}, {"shape", p->w.shape}});
    header["blobs"] = blobs;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path);
    const std::string hs = header.dump();
    const std::uint32_t len = std::uint32_t(hs.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(hs.data(), std::streamsize(hs.size()));
    for (auto& [name, p] : model.params())
        out.write(reinterpret_cast<const char*>(p->w.v.data()),
                  std::streamsize(p->w.size() * sizeof(float)));
    if (!out) throw DataError("short write saving model: " + path);
}

RasaModel<float> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len == 0 || len > (1u << 20)) throw DataError("bad model header: " + path);
    std::string hs(len, '\0');
    in.read(hs.data(), std::streamsize(len));
    if (!in) throw DataError("truncated model header: " + path);
    json header;
    ArchConfig arch;
    try {
        header = json::parse(hs);
        if (header.value("format", "") != "rosa-model-v1")
            throw DataError("unrecognized model format in " + path);
        arch = arch_from_json(header.at("arch"));
    } catch (const json::exception& e) {
        throw DataError("malformed model header " + path + ": " + e.what());
    }
    RasaModel<float> model(arch);
    model.frame_rate_hz = header.value("frame_rate_hz", 1.0);

    auto params = model.params();
    const auto& blobs = header.at("blobs");
    if (blobs.size() != params.size()) throw DataError("model blob count mismatch: " + path);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, p] = params[i];
        if (blobs[i].value("name", "") != name)
            throw DataError("model blob order mismatch at '" + name + "': " + path);
        const auto shape = blobs[i].at("shape").get<std::vector<int>>();
        if (shape != p->w.shape) throw DataError("model blob shape mismatch at '" + name + "'");
        in.read(reinterpret_cast<char*>(p->w.v.data()),
                std::streamsize(p->w.size() * sizeof(float)));
        if (!in) throw DataError("truncated model payload at '" + name + "': " + path);
    }
    return model;
}

}  // namespace rosa::net
