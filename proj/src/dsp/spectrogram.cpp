#include "rosa/dsp/spectrogram.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "rosa/kern/kernels.hpp"

namespace rosa::dsp {

using nlohmann::json;

const char* to_string(SpectrogramKind k) {
    switch (k) {
        case SpectrogramKind::Movement: return "movement";
        case SpectrogramKind::Breathing: return "breathing";
        case SpectrogramKind::Doppler: return "doppler";
    }
    return "?";
}

SpectrogramKind spectrogram_kind_from_string(const std::string& s) {
    if (s == "movement") return SpectrogramKind::Movement;
    if (s == "breathing") return SpectrogramKind::Breathing;
    if (s == "doppler") return SpectrogramKind::Doppler;
    throw DataError("unknown spectrogram kind: " + s);
}

void save_spectrogram(const ThreeChannelSpectrogram& s, const std::filesystem::path& file) {
    json header{
        {"dims", {3, s.n_range_bins(), s.n_frames()}},
        {"frame_rate_hz", s.frame_rate_hz()},
        {"bin_spacing_m", s.channels[0].bin_spacing_m},
        {"kinds", {to_string(s.channels[0].kind), to_string(s.channels[1].kind),
                   to_string(s.channels[2].kind)}},
        {"normalized", s.normalized},
        {"norms", json::array()},
    };
    for (const auto& n : s.norms)
        header["norms"].push_back(json{{"mean", n.mean}, {"stddev", n.stddev}});

    const std::string htext = header.dump();
    std::ofstream f(file, std::ios::binary);
    if (!f) throw DataError("cannot open for write: " + file.string());
    const std::uint32_t hlen = std::uint32_t(htext.size());
    f.write(reinterpret_cast<const char*>(&hlen), 4);
    f.write(htext.data(), std::streamsize(htext.size()));
    for (const auto& ch : s.channels)
        f.write(reinterpret_cast<const char*>(ch.data.data()),
                std::streamsize(ch.data.size() * sizeof(float)));
    if (!f) throw DataError("write failed: " + file.string());
}

ThreeChannelSpectrogram load_spectrogram(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw DataError("missing spectrogram file: " + file.string());
    std::uint32_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), 4);
    if (!f || hlen == 0 || hlen > (1u << 20)) throw DataError("malformed .spec header length");
    std::string htext(hlen, '\0');
    f.read(htext.data(), hlen);
    if (!f) throw DataError("truncated .spec header");
    json header;
    try {
        header = json::parse(htext);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed .spec header: ") + e.what());
    }

    ThreeChannelSpectrogram s;
    const auto dims = header.at("dims");
    const int bins = dims.at(1).get<int>();
    const int frames = dims.at(2).get<int>();
    if (bins <= 0 || frames <= 0) throw DataError(".spec: non-positive dimensions");
    s.normalized = header.value("normalized", false);
    for (int c = 0; c < 3; ++c) {
        auto& ch = s.channels[c];
        ch.kind = spectrogram_kind_from_string(header.at("kinds").at(c).get<std::string>());
        ch.n_range_bins = bins;
        ch.n_frames = frames;
        ch.frame_rate_hz = header.at("frame_rate_hz").get<double>();
        ch.bin_spacing_m = header.at("bin_spacing_m").get<double>();
        ch.data.resize(std::size_t(bins) * frames);
        f.read(reinterpret_cast<char*>(ch.data.data()),
               std::streamsize(ch.data.size() * sizeof(float)));
        if (!f) throw DataError(".spec payload shorter than declared dimensions");
        s.norms[c].mean = header.at("norms").at(c).at("mean").get<double>();
        s.norms[c].stddev = header.at("norms").at(c).at("stddev").get<double>();
    }
    return s;
}

}  // namespace rosa::dsp
