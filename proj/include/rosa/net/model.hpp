#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rosa/net/anchors.hpp"
#include "rosa/net/config.hpp"
#include "rosa/net/layers.hpp"
#include "rosa/net/tensor.hpp"

namespace rosa::net {

inline constexpr int kNumLevels = 3;

template <class T>
struct Activations {
    Tensor<T> x;                  // (3, H, Tt)
    Tensor<T> s1, s1r, s2, s2r;   // stem
    Tensor<T> r1, r1r, r2;        // residual block pre-activation
    Tensor<T> rsum, rsumr;        // skip sum and its ReLU
    Tensor<T> p0;                 // (W, Tt/4)
    Tensor<T> d1, p1, d2, p2;     // strides 8 and 16
    std::array<Tensor<T>, kNumLevels> spn_h, spn_hr, spn_cls, spn_reg;
    std::vector<Segment> proposals;  // input-frame coordinates
    Tensor<T> roi;                   // (P, W * roi_size)
    Tensor<T> f1, f1r, f2, f2r, head_cls, head_reg;
};

struct LossParts {
    double total = 0;
    double spn_cls = 0;
    double spn_reg = 0;
    double head_cls = 0;
    double head_reg = 0;
};

// Two-stage 1D segment detector over three-channel spectrograms.
// Stage one (SPN) scores anchors on a three-level feature pyramid,
// stage two classifies RoI-aligned proposals and refines their bounds.
template <class T>
class RasaModel {
public:
    ArchConfig arch;
    double frame_rate_hz = 1.0;

    Conv2dStride2<T> stem1, stem2;
    Conv2dSame<T> res1, res2;
    RangePool<T> pool;
    Conv1dDown<T> down1, down2;
    Conv1dSame<T> spn_conv;
    Conv1x1<T> spn_cls, spn_reg;
    Linear<T> fc1, fc2, head_cls, head_reg;
    ReLU<T> relu;

    explicit RasaModel(const ArchConfig& cfg) : arch(cfg) {
        arch.validate();
        const int w = arch.width;
        const int s = num_scales();
        stem1 = Conv2dStride2<T>(3, w);
        stem2 = Conv2dStride2<T>(w, w);
        res1 = Conv2dSame<T>(w, w);
        res2 = Conv2dSame<T>(w, w);
        pool.use_max = arch.max_range_pool;
        down1 = Conv1dDown<T>(w, w);
        down2 = Conv1dDown<T>(w, w);
        spn_conv = Conv1dSame<T>(w, w);
        spn_cls = Conv1x1<T>(w, s);
        spn_reg = Conv1x1<T>(w, 2 * s);
        fc1 = Linear<T>(w * arch.roi_size, arch.head_hidden);
        fc2 = Linear<T>(arch.head_hidden, arch.head_hidden);
        head_cls = Linear<T>(arch.head_hidden, arch.num_classes);
        head_reg = Linear<T>(arch.head_hidden, 2);
    }

    int num_scales() const { return int(arch.anchor_scales_s.size()); }

    std::vector<std::pair<std::string, Param<T>*>> params() {
        return {
            {"stem1.w", &stem1.w},       {"stem1.b", &stem1.b},
            {"stem2.w", &stem2.w},       {"stem2.b", &stem2.b},
            {"res1.w", &res1.w},         {"res1.b", &res1.b},
            {"res2.w", &res2.w},         {"res2.b", &res2.b},
            {"down1.w", &down1.w},       {"down1.b", &down1.b},
            {"down2.w", &down2.w},       {"down2.b", &down2.b},
            {"spn_conv.w", &spn_conv.w}, {"spn_conv.b", &spn_conv.b},
            {"spn_cls.w", &spn_cls.w},   {"spn_cls.b", &spn_cls.b},
            {"spn_reg.w", &spn_reg.w},   {"spn_reg.b", &spn_reg.b},
            {"fc1.w", &fc1.w},           {"fc1.b", &fc1.b},
            {"fc2.w", &fc2.w},           {"fc2.b", &fc2.b},
            {"head_cls.w", &head_cls.w}, {"head_cls.b", &head_cls.b},
            {"head_reg.w", &head_reg.w}, {"head_reg.b", &head_reg.b},
        };
    }

    void init(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        stem1.init(rng);
        stem2.init(rng);
        res1.init(rng);
        res2.init(rng);
        down1.init(rng);
        down2.init(rng);
        spn_conv.init(rng);
        spn_cls.init(rng);
        spn_reg.init(rng);
        fc1.init(rng);
        fc2.init(rng);
        head_cls.init(rng);
        head_reg.init(rng);
    }

    void zero_grad() {
        for (auto& [name, p] : params()) p->g.zero();
    }

    std::vector<int> level_lengths(int frames) const {
        std::vector<int> out;
        for (int stride : arch.level_strides) out.push_back(frames / stride);
        return out;
    }

    std::vector<AnchorSegment> anchors_for(int frames) const {
        std::vector<double> scales_frames;
        for (double s : arch.anchor_scales_s) scales_frames.push_back(s * frame_rate_hz);
        return generate_anchors(level_lengths(frames), arch.level_strides, scales_frames);
    }

    // backbone + SPN heads
    void forward(const Tensor<T>& x, Activations<T>& a) const {
        a.x = x;
        a.s1 = stem1.forward(a.x);
        a.s1r = relu.forward(a.s1);
        a.s2 = stem2.forward(a.s1r);
        a.s2r = relu.forward(a.s2);
        a.r1 = res1.forward(a.s2r);
        a.r1r = relu.forward(a.r1);
        a.r2 = res2.forward(a.r1r);
        a.rsum = a.r2;
        for (std::size_t i = 0; i < a.rsum.size(); ++i) a.rsum.v[i] += a.s2r.v[i];
        a.rsumr = relu.forward(a.rsum);
        a.p0 = pool.forward(a.rsumr);
        a.d1 = down1.forward(a.p0);
        a.p1 = relu.forward(a.d1);
        a.d2 = down2.forward(a.p1);
        a.p2 = relu.forward(a.d2);

        const std::array<const Tensor<T>*, kNumLevels> levels = {&a.p0, &a.p1, &a.p2};
        for (int lv = 0; lv < kNumLevels; ++lv) {
            a.spn_h[lv] = spn_conv.forward(*levels[lv]);
            a.spn_hr[lv] = relu.forward(a.spn_h[lv]);
            a.spn_cls[lv] = spn_cls.forward(a.spn_hr[lv]);
            a.spn_reg[lv] = spn_reg.forward(a.spn_hr[lv]);
        }
    }

    // flat anchor index -> (level, scale, step) follows generate_anchors:
    // all scales at each step, steps in order, levels in order
    std::vector<Proposal> propose(const Activations<T>& a,
                                  const std::vector<AnchorSegment>& anchors) const {
        const int frames = a.x.dim(2);
        const int s_n = num_scales();
        std::vector<ScoredSegment> cand;
        cand.reserve(anchors.size());
        std::size_t idx = 0;
        for (int lv = 0; lv < kNumLevels; ++lv) {
            const int l = a.spn_cls[lv].dim(1);
            for (int t = 0; t < l; ++t) {
                for (int s = 0; s < s_n; ++s, ++idx) {
                    const double logit = double(a.spn_cls[lv].row(s, l)[t]);
                    SegmentDelta d{double(a.spn_reg[lv].row(2 * s, l)[t]),
                                   double(a.spn_reg[lv].row(2 * s + 1, l)[t])};
                    Segment seg = decode_segment(d, anchors[idx]);
                    seg.start = std::max(seg.start, 0.0);
                    seg.end = std::min(seg.end, double(frames));
                    if (seg.end - seg.start < 1.0) continue;
                    cand.push_back({seg.start, seg.end, 1.0 / (1.0 + std::exp(-logit)), 0});
                }
            }
        }
        std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.start < y.start;
        });
        if (int(cand.size()) > arch.pre_nms_topk) cand.resize(std::size_t(arch.pre_nms_topk));
        auto kept = nms_1d(std::move(cand), arch.proposal_nms_iou, false);
        if (int(kept.size()) > arch.post_nms_topk) kept.resize(std::size_t(arch.post_nms_topk));
        std::vector<Proposal> out;
        out.reserve(kept.size());
        for (const auto& k : kept) out.push_back({k.start, k.end, k.score});
        return out;
    }

    // RoIAlign on the stride-4 level plus the two-layer FC head
    void run_head(Activations<T>& a, const std::vector<Segment>& proposals) const {
        a.proposals = proposals;
        const int p_n = int(proposals.size());
        const int w = arch.width;
        a.roi = Tensor<T>({p_n, w * arch.roi_size});
        const double stride = double(arch.level_strides[0]);
        Tensor<T> one;
        for (int i = 0; i < p_n; ++i) {
            roi_align_1d(a.p0, proposals[std::size_t(i)].start / stride,
                         proposals[std::size_t(i)].end / stride, arch.roi_size, one);
            std::copy(one.v.begin(), one.v.end(), a.roi.row(i, w * arch.roi_size));
        }
        a.f1 = fc1.forward(a.roi);
        a.f1r = relu.forward(a.f1);
        a.f2 = fc2.forward(a.f1r);
        a.f2r = relu.forward(a.f2);
        a.head_cls = head_cls.forward(a.f2r);
        a.head_reg = head_reg.forward(a.f2r);
    }

    // full training pass: forward, losses, backward with gradient
    // accumulation into every parameter. When fixed_proposals is given the
    // proposal stage is bypassed (finite-difference checks need the RoI
    // set to stay constant under parameter perturbation).
    LossParts train_step(const Tensor<T>& x, const std::vector<Segment>& gts,
                         const std::vector<int>& gt_classes,
                         const std::vector<Segment>* fixed_proposals = nullptr) {
        Activations<T> a;
        forward(x, a);
        const auto anchors = anchors_for(x.dim(2));
        const auto matches = match_anchors(anchors, gts, arch.spn_pos_iou, arch.spn_neg_iou);

        LossParts loss;
        std::size_t n_pos = 0, n_neg = 0;
        for (const auto& m : matches) {
            if (m.label == 1) ++n_pos;
            else if (m.label == 0) ++n_neg;
        }

        // SPN gradients per level, laid out like the activations
        std::array<Tensor<T>, kNumLevels> d_spn_cls, d_spn_reg;
        for (int lv = 0; lv < kNumLevels; ++lv) {
            d_spn_cls[lv] = Tensor<T>(a.spn_cls[lv].shape);
            d_spn_reg[lv] = Tensor<T>(a.spn_reg[lv].shape);
        }
        const double w_pos = n_pos ? 0.5 / double(n_pos) : 0.0;
        const double w_neg = n_neg ? 0.5 / double(n_neg) : 0.0;
        const int s_n = num_scales();
        std::size_t idx = 0;
        for (int lv = 0; lv < kNumLevels; ++lv) {
            const int l = a.spn_cls[lv].dim(1);
            for (int t = 0; t < l; ++t) {
                for (int s = 0; s < s_n; ++s, ++idx) {
                    const auto& m = matches[idx];
                    if (m.label < 0) continue;
                    const double wgt = m.label == 1 ? w_pos : w_neg;
                    const double z = double(a.spn_cls[lv].row(s, l)[t]);
                    const double y = m.label;
                    // stable BCE-with-logits
                    loss.spn_cls += wgt * (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))));
                    const double sig = 1.0 / (1.0 + std::exp(-z));
                    d_spn_cls[lv].row(s, l)[t] += T(wgt * (sig - y));
                    if (m.label == 1) {
                        const double rn = 1.0 / double(std::max<std::size_t>(n_pos, 1));
                        const double pred[2] = {double(a.spn_reg[lv].row(2 * s, l)[t]),
                                                double(a.spn_reg[lv].row(2 * s + 1, l)[t])};
                        const double tgt[2] = {m.target.d_center, m.target.d_log_length};
                        for (int k = 0; k < 2; ++k) {
                            const double d = pred[k] - tgt[k];
                            loss.spn_reg += rn * smooth_l1(d);
                            d_spn_reg[lv].row(2 * s + k, l)[t] += T(rn * smooth_l1_grad(d));
                        }
                    }
                }
            }
        }

        // second stage: proposals (plus the ground truths) classified by IoU
        std::vector<Segment> props;
        if (fixed_proposals) {
            props = *fixed_proposals;
        } else {
            for (const auto& p : propose(a, anchors)) props.push_back({p.t_start, p.t_end});
            for (const auto& g : gts) props.push_back(g);
        }
        run_head(a, props);
        const int p_n = int(props.size());
        std::vector<int> labels(std::size_t(p_n), 0);
        std::vector<SegmentDelta> targets(std::size_t(p_n), SegmentDelta{});
        for (int i = 0; i < p_n; ++i) {
            double best = 0;
            int best_g = -1;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                const double v = iou_segments(props[std::size_t(i)], gts[g]);
                if (v > best) {
                    best = v;
                    best_g = int(g);
                }
            }
            if (best_g >= 0 && best >= arch.proposal_pos_iou) {
                labels[std::size_t(i)] = gt_classes[std::size_t(best_g)];
                AnchorSegment as{props[std::size_t(i)].center(), props[std::size_t(i)].length(),
                                 0, 0};
                targets[std::size_t(i)] = encode_segment(gts[std::size_t(best_g)], as);
            }
        }

        Tensor<T> d_head_cls(a.head_cls.shape), d_head_reg(a.head_reg.shape);
        std::size_t n_fg = 0;
        for (int lab : labels) n_fg += lab > 0;
        const double cls_norm = p_n ? 1.0 / double(p_n) : 0.0;
        const double reg_norm = n_fg ? 1.0 / double(n_fg) : 0.0;
        const int c_n = arch.num_classes;
        std::vector<double> prob(std::size_t(c_n), 0.0);
        for (int i = 0; i < p_n; ++i) {
            const T* zi = a.head_cls.row(i, c_n);
            softmax_row(zi, c_n, prob.data());
            const int lab = labels[std::size_t(i)];
            loss.head_cls += -cls_norm * std::log(std::max(prob[std::size_t(lab)], 1e-300));
            T* dzi = d_head_cls.row(i, c_n);
            for (int c = 0; c < c_n; ++c)
                dzi[c] = T(cls_norm * (prob[std::size_t(c)] - (c == lab ? 1.0 : 0.0)));
            if (lab > 0) {
                const double pred[2] = {double(a.head_reg.row(i, 2)[0]),
                                        double(a.head_reg.row(i, 2)[1])};
                const double tgt[2] = {targets[std::size_t(i)].d_center,
                                       targets[std::size_t(i)].d_log_length};
                for (int k = 0; k < 2; ++k) {
                    const double d = pred[k] - tgt[k];
                    loss.head_reg += reg_norm * smooth_l1(d);
                    d_head_reg.row(i, 2)[k] = T(reg_norm * smooth_l1_grad(d));
                }
            }
        }
        loss.total = loss.spn_cls + loss.spn_reg + loss.head_cls + loss.head_reg;

        backward(a, d_spn_cls, d_spn_reg, d_head_cls, d_head_reg);
        return loss;
    }

    // inference over a full (already normalized) spectrogram
    std::vector<DetectedSegment> detect(const Tensor<T>& x) const {
        Activations<T> a;
        forward(x, a);
        const auto anchors = anchors_for(x.dim(2));
        const auto proposals = propose(a, anchors);
        if (proposals.empty()) return {};
        std::vector<Segment> segs;
        for (const auto& p : proposals) segs.push_back({p.t_start, p.t_end});
        run_head(a, segs);

        const int c_n = arch.num_classes;
        const int frames = x.dim(2);
        std::vector<double> prob(std::size_t(c_n), 0.0);
        std::vector<ScoredSegment> cand;
        for (int i = 0; i < int(segs.size()); ++i) {
            softmax_row(a.head_cls.row(i, c_n), c_n, prob.data());
            int best_c = 1;
            for (int c = 2; c < c_n; ++c)
                if (prob[std::size_t(c)] > prob[std::size_t(best_c)]) best_c = c;
            const double score = arch.score_mode == "class" ? prob[std::size_t(best_c)]
                                                            : 1.0 - prob[0];
            AnchorSegment as{segs[std::size_t(i)].center(), segs[std::size_t(i)].length(), 0, 0};
            Segment refined = decode_segment(
                {double(a.head_reg.row(i, 2)[0]), double(a.head_reg.row(i, 2)[1])}, as);
            refined.start = std::max(refined.start, 0.0);
            refined.end = std::min(refined.end, double(frames));
            if (refined.end <= refined.start) continue;
            cand.push_back({refined.start, refined.end, score, best_c});
        }
        // events are mutually exclusive in time, so the final suppression is
        // class-agnostic; per-class NMS would keep near-duplicates that only
        // differ in category
        auto kept = nms_1d(std::move(cand), arch.detect_nms_iou, false);
        std::vector<DetectedSegment> out;
        for (const auto& k : kept) {
            const double t0 = k.start / frame_rate_hz;
            const double t1 = k.end / frame_rate_hz;
            if (t1 - t0 < arch.min_duration_s) continue;
            if (k.score < arch.score_floor) continue;
            DetectedSegment d;
            d.t_start_s = t0;
            d.t_end_s = t1;
            d.score = k.score;
            d.category = EventCategory(k.category - 1);
            out.push_back(d);
        }
        return out;
    }

    static double smooth_l1(double d) {
        const double ad = std::abs(d);
        return ad < 1.0 ? 0.5 * d * d : ad - 0.5;
    }
    static double smooth_l1_grad(double d) {
        return std::abs(d) < 1.0 ? d : (d > 0 ? 1.0 : -1.0);
    }
    static void softmax_row(const T* z, int n, double* p) {
        double mx = double(z[0]);
        for (int c = 1; c < n; ++c) mx = std::max(mx, double(z[c]));
        double sum = 0;
        for (int c = 0; c < n; ++c) {
            p[c] = std::exp(double(z[c]) - mx);
            sum += p[c];
        }
        for (int c = 0; c < n; ++c) p[c] /= sum;
    }

private:
    void backward(Activations<T>& a, std::array<Tensor<T>, kNumLevels>& d_spn_cls,
                  std::array<Tensor<T>, kNumLevels>& d_spn_reg, const Tensor<T>& d_head_cls,
                  const Tensor<T>& d_head_reg) {
        // head -> RoI features -> p0
        Tensor<T> d_f2r;
        head_cls.backward(a.f2r, d_head_cls, d_f2r);
        head_reg.backward(a.f2r, d_head_reg, d_f2r);
        Tensor<T> d_f2;
        relu.backward(a.f2r, d_f2r, d_f2);
        Tensor<T> d_f1r;
        fc2.backward(a.f1r, d_f2, d_f1r);
        Tensor<T> d_f1;
        relu.backward(a.f1r, d_f1r, d_f1);
        Tensor<T> d_roi;
        fc1.backward(a.roi, d_f1, d_roi);

        Tensor<T> d_p0(a.p0.shape);
        const double stride = double(arch.level_strides[0]);
        const int w = arch.width;
        Tensor<T> one({w, arch.roi_size});
        for (int i = 0; i < int(a.proposals.size()); ++i) {
            const T* src = d_roi.row(i, w * arch.roi_size);
            std::copy(src, src + std::size_t(w) * arch.roi_size, one.v.begin());
            roi_align_1d_backward(one, a.proposals[std::size_t(i)].start / stride,
                                  a.proposals[std::size_t(i)].end / stride, arch.roi_size, d_p0);
        }

        // SPN heads per level
        std::array<Tensor<T>*, kNumLevels> d_levels = {&d_p0, nullptr, nullptr};
        Tensor<T> d_p1(a.p1.shape), d_p2(a.p2.shape);
        d_levels[1] = &d_p1;
        d_levels[2] = &d_p2;
        const std::array<const Tensor<T>*, kNumLevels> levels = {&a.p0, &a.p1, &a.p2};
        for (int lv = 0; lv < kNumLevels; ++lv) {
            Tensor<T> d_hr;
            spn_cls.backward(a.spn_hr[lv], d_spn_cls[lv], d_hr);
            spn_reg.backward(a.spn_hr[lv], d_spn_reg[lv], d_hr);
            Tensor<T> d_h;
            relu.backward(a.spn_hr[lv], d_hr, d_h);
            spn_conv.backward(*levels[lv], d_h, *d_levels[lv]);
        }

        // pyramid chain back to p0
        Tensor<T> d_d2;
        relu.backward(a.p2, d_p2, d_d2);
        down2.backward(a.p1, d_d2, d_p1);
        Tensor<T> d_d1;
        relu.backward(a.p1, d_p1, d_d1);
        down1.backward(a.p0, d_d1, d_p0);

        // backbone
        Tensor<T> d_rsumr;
        pool.backward(a.rsumr, d_p0, d_rsumr);
        Tensor<T> d_rsum;
        relu.backward(a.rsumr, d_rsumr, d_rsum);
        Tensor<T> d_r1r;
        res2.backward(a.r1r, d_rsum, d_r1r);
        Tensor<T> d_r1;
        relu.backward(a.r1r, d_r1r, d_r1);
        Tensor<T> d_s2r = d_rsum;  // skip connection
        res1.backward(a.s2r, d_r1, d_s2r);
        Tensor<T> d_s2;
        relu.backward(a.s2r, d_s2r, d_s2);
        Tensor<T> d_s1r;
        stem2.backward(a.s1r, d_s2, d_s1r);
        Tensor<T> d_s1;
        relu.backward(a.s1r, d_s1r, d_s1);
        Tensor<T> d_x;
        stem1.backward(a.x, d_s1, d_x);
    }
};

// float checkpoint on disk: JSON header, then named f32 blobs
void save_model(RasaModel<float>& model, const std::string& path);
RasaModel<float> load_model(const std::string& path);

}  // namespace rosa::net
