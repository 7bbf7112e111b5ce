#include "rosa/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rosa::net {

TrainSample make_sample(const std::string& session_id, const dsp::ThreeChannelSpectrogram& spec,
                        const std::vector<EventAnnotation>& events) {
    if (!spec.normalized) throw DataError("training input must be a normalized spectrogram");
    TrainSample s;
    s.session_id = session_id;
    s.frame_rate_hz = spec.frame_rate_hz();
    const int h = spec.n_range_bins(), t = spec.n_frames();
    s.x = Tensor<float>({3, h, t});
    for (int c = 0; c < 3; ++c)
        std::copy(spec.channels[std::size_t(c)].data.begin(),
                  spec.channels[std::size_t(c)].data.end(),
                  s.x.data() + std::size_t(c) * h * t);
    for (const auto& e : events) {
        s.gts.push_back({e.t_start_s * s.frame_rate_hz, e.t_end_s * s.frame_rate_hz});
        s.gt_classes.push_back(int(e.category) + 1);
    }
    return s;
}

std::vector<int> fold_assignment(int n, int folds) {
    std::vector<int> out(std::size_t(n), 0);
    for (int i = 0; i < n; ++i) out[std::size_t(i)] = i % folds;
    return out;
}

double cosine_lr(double base_lr, int epoch, int total_epochs) {
    return base_lr * 0.5 * (1.0 + std::cos(M_PI * double(epoch) / double(total_epochs)));
}

namespace {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// crop [t0, t0 + crop) of the sample; events clipped to the window and
// kept if at least the minimum duration survives
void make_crop(const TrainSample& s, int t0, int crop, Tensor<float>& x,
               std::vector<Segment>& gts, std::vector<int>& classes) {
    const int h = s.x.dim(1), t = s.x.dim(2);
    x = Tensor<float>({3, h, crop});
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < h; ++r)
            std::copy(s.x.data() + (std::size_t(c) * h + r) * t + t0,
                      s.x.data() + (std::size_t(c) * h + r) * t + t0 + crop,
                      x.data() + (std::size_t(c) * h + r) * crop);
    gts.clear();
    classes.clear();
    const double min_frames = kMinEventDuration * s.frame_rate_hz;
    for (std::size_t i = 0; i < s.gts.size(); ++i) {
        const double a = std::max(s.gts[i].start - t0, 0.0);
        const double b = std::min(s.gts[i].end - t0, double(crop));
        if (b - a < min_frames) continue;
        gts.push_back({a, b});
        classes.push_back(s.gt_classes[i]);
    }
}

int pick_crop_start(const TrainSample& s, int crop, double bias, std::mt19937_64& rng) {
    const int t = s.x.dim(2);
    const int max_t0 = std::max(t - crop, 0);
    if (max_t0 == 0) return 0;
    if (!s.gts.empty() && uniform01(rng) < bias) {
        const auto& g = s.gts[std::size_t(rng() % s.gts.size())];
        const double center = 0.5 * (g.start + g.end);
        const double jitter = (uniform01(rng) - 0.5) * 0.5 * crop;
        const int t0 = int(std::lround(center + jitter - crop / 2.0));
        return std::clamp(t0, 0, max_t0);
    }
    return int(rng() % std::uint64_t(max_t0 + 1));
}

}  // namespace

RasaModel<float> train_model(const std::vector<TrainSample>& data, const ArchConfig& arch,
                             const TrainConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (data.empty()) throw DataError("train: empty dataset");
    RasaModel<float> model(arch);
    model.frame_rate_hz = data[0].frame_rate_hz;
    model.init(cfg.seed);

    auto params = model.params();
    std::vector<Tensor<float>> velocity;
    velocity.reserve(params.size());
    for (auto& [name, p] : params) velocity.emplace_back(p->w.shape);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    if (log)
        *log << "epoch,step,lr,loss_total,loss_spn_cls,loss_spn_reg,loss_head_cls,"
                "loss_head_reg\n";

    int step = 0;
    Tensor<float> x;
    std::vector<Segment> gts;
    std::vector<int> classes;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.base_lr, epoch, cfg.epochs);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t oi : order) {
            const auto& s = data[oi];
            const int crop = std::min(cfg.crop_frames, s.x.dim(2));
            for (int k = 0; k < cfg.crops_per_session; ++k) {
                const int t0 = pick_crop_start(s, crop, cfg.event_crop_bias, rng);
                make_crop(s, t0, crop, x, gts, classes);
                model.zero_grad();
                const LossParts loss = model.train_step(x, gts, classes);
                if (!std::isfinite(loss.total)) throw NumericError("train: loss diverged");
                for (std::size_t pi = 0; pi < params.size(); ++pi) {
                    auto& p = *params[pi].second;
                    auto& v = velocity[pi];
                    for (std::size_t j = 0; j < v.size(); ++j) {
                        v.v[j] = float(cfg.momentum) * v.v[j] - float(lr) * p.g.v[j];
                        p.w.v[j] += v.v[j];
                    }
                }
                if (log)
                    *log << epoch << ',' << step << ',' << lr << ',' << loss.total << ','
                         << loss.spn_cls << ',' << loss.spn_reg << ',' << loss.head_cls << ','
                         << loss.head_reg << '\n';
                ++step;
            }
        }
    }
    return model;
}

}  // namespace rosa::net
