#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "rosa/plot/svg.hpp"

using namespace rosa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("heatmap emits one rect per cell") {
    dsp::Spectrogram s;
    s.n_range_bins = 4;
    s.n_frames = 10;
    s.frame_rate_hz = 1.0;
    s.bin_spacing_m = 0.05;
    s.data.resize(40);
    for (std::size_t i = 0; i < 40; ++i) s.data[i] = float(i);
    const auto p = fs::temp_directory_path() / "rosa_test_hm.svg";
    plot::save_spectrogram_heatmap(s, p);
    const auto body = slurp(p);
    CHECK(count_of(body, "<rect") == 40);
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(body.rfind("</svg>") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("timeline draws truth above detections") {
    std::vector<EventAnnotation> truth{{EventCategory::OA, 10, 40}, {EventCategory::H, 100, 130}};
    std::vector<DetectedSegment> dets{{EventCategory::OA, 0.8, 12, 38}};
    const auto p = fs::temp_directory_path() / "rosa_test_tl.svg";
    plot::save_event_timeline(600.0, truth, dets, p);
    const auto body = slurp(p);
    CHECK(count_of(body, "class=\"truth\"") == 2);
    CHECK(count_of(body, "class=\"detection\"") == 1);
    fs::remove(p);
}

TEST_CASE("scatter plots one circle per pair") {
    const auto p = fs::temp_directory_path() / "rosa_test_sc.svg";
    plot::save_scatter({1, 5, 20}, {2, 6, 18}, "reference", "estimate", p);
    const auto body = slurp(p);
    CHECK(count_of(body, "<circle") == 3);
    CHECK(body.find("reference") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("bland altman shows bias and both limits") {
    const auto p = fs::temp_directory_path() / "rosa_test_ba.svg";
    plot::save_bland_altman({10, 20, 30, 42}, {12, 19, 33, 40}, p);
    const auto body = slurp(p);
    CHECK(count_of(body, "class=\"limit\"") == 3);
    CHECK(count_of(body, "<circle") == 4);
    CHECK_THROWS_AS(plot::save_bland_altman({1}, {2}, p), DataError);
    fs::remove(p);
}
