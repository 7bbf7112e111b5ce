#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::dsp {

enum class SpectrogramKind : int { Movement = 0, Breathing = 1, Doppler = 2 };

const char* to_string(SpectrogramKind k);
SpectrogramKind spectrogram_kind_from_string(const std::string& s);

// Real-valued (n_range_bins, n_frames) grid, row-major by range bin.
struct Spectrogram {
    SpectrogramKind kind = SpectrogramKind::Movement;
    int n_range_bins = 0;
    int n_frames = 0;
    double frame_rate_hz = 1.0;
    double bin_spacing_m = 0.0;
    std::vector<float> data;

    float& at(int r, int k) { return data[std::size_t(r) * n_frames + k]; }
    float at(int r, int k) const { return data[std::size_t(r) * n_frames + k]; }
    const float* row(int r) const { return data.data() + std::size_t(r) * n_frames; }
};

struct ChannelNorm {
    double mean = 0.0;
    double stddev = 1.0;
};

// Channel order is fixed: (movement, breathing, doppler).
struct ThreeChannelSpectrogram {
    std::array<Spectrogram, 3> channels;
    std::array<ChannelNorm, 3> norms;  // affine record applied when normalized
    bool normalized = false;

    int n_range_bins() const { return channels[0].n_range_bins; }
    int n_frames() const { return channels[0].n_frames; }
    double frame_rate_hz() const { return channels[0].frame_rate_hz; }
};

// .spec container: u32 little-endian header length, JSON header, then
// row-major little-endian f32 payload for the three channels in order.
void save_spectrogram(const ThreeChannelSpectrogram& s, const std::filesystem::path& file);
ThreeChannelSpectrogram load_spectrogram(const std::filesystem::path& file);

}  // namespace rosa::dsp
