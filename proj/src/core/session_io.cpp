#include "rosa/core/session_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace rosa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot open for write: " + p.string());
    f << text;
    if (!f) throw DataError("write failed: " + p.string());
}

json det_to_json(const DetectedSegment& d) {
    return json{{"type", to_string(d.category)},
                {"t_start_s", d.t_start_s},
                {"t_end_s", d.t_end_s},
                {"score", d.score}};
}

}  // namespace

void save_session(const SleepSession& session, const fs::path& directory) {
    session.validate();
    fs::create_directories(directory);

    json manifest{
        {"id", session.id},
        {"duration_s", session.duration_s},
        {"radar", nullptr},
        {"tst_h", session.tst_h},
        {"spo2_rate_hz", session.spo2.sample_rate_hz},
        {"files", {{"beat", session.beat ? "beat.c64" : ""},
                   {"spo2", "spo2.csv"},
                   {"events", "events.jsonl"}}},
    };
    if (session.beat) {
        const auto& c = session.beat->config;
        manifest["radar"] = json{{"start_frequency_hz", c.start_frequency_hz},
                                 {"sweep_bandwidth_hz", c.sweep_bandwidth_hz},
                                 {"frame_rate_hz", c.frame_rate_hz},
                                 {"samples_per_chirp", c.samples_per_chirp}};
    }
    write_file(directory / "manifest.json", manifest.dump(2) + "\n");

    if (session.beat) {
        std::ofstream f(directory / "beat.c64", std::ios::binary);
        if (!f) throw DataError("cannot open for write: " + (directory / "beat.c64").string());
        // interleaved little-endian f32; complex<float> layout is already (re, im)
        f.write(reinterpret_cast<const char*>(session.beat->data.data()),
                std::streamsize(session.beat->data.size() * sizeof(std::complex<float>)));
        if (!f) throw DataError("write failed: beat.c64");
    }

    {
        std::ostringstream csv;
        csv << "t_s,spo2_pct\n";
        csv.precision(10);
        for (std::size_t i = 0; i < session.spo2.samples.size(); ++i)
            csv << (double(i) / session.spo2.sample_rate_hz) << "," << session.spo2.samples[i]
                << "\n";
        write_file(directory / "spo2.csv", csv.str());
    }

    {
        std::ostringstream out;
        for (const auto& e : session.events) {
            json j{{"type", to_string(e.category)},
                   {"t_start_s", e.t_start_s},
                   {"t_end_s", e.t_end_s}};
            out << j.dump() << "\n";
        }
        write_file(directory / "events.jsonl", out.str());
    }
}

SleepSession load_session(const fs::path& directory) {
    const fs::path mpath = directory / "manifest.json";
    if (!fs::exists(mpath)) throw DataError("missing manifest: " + mpath.string());

    json manifest;
    {
        std::ifstream f(mpath);
        try {
            f >> manifest;
        } catch (const json::parse_error& e) {
            throw DataError("malformed manifest " + mpath.string() + ": " + e.what());
        }
    }

    SleepSession s;
    try {
        s.id = manifest.at("id").get<std::string>();
        s.duration_s = manifest.at("duration_s").get<double>();
        s.tst_h = manifest.at("tst_h").get<double>();
        s.spo2.sample_rate_hz = manifest.at("spo2_rate_hz").get<double>();
    } catch (const json::exception& e) {
        throw DataError("manifest schema error: " + std::string(e.what()));
    }

    const std::string beat_file = manifest["files"].value("beat", "");
    if (!beat_file.empty() && fs::exists(directory / beat_file)) {
        if (!manifest.contains("radar") || manifest["radar"].is_null())
            throw DataError("manifest lists a beat file but no radar config");
        const auto& r = manifest["radar"];
        BeatMatrix beat;
        beat.config.start_frequency_hz = r.at("start_frequency_hz").get<double>();
        beat.config.sweep_bandwidth_hz = r.at("sweep_bandwidth_hz").get<double>();
        beat.config.frame_rate_hz = r.at("frame_rate_hz").get<double>();
        beat.config.samples_per_chirp = r.at("samples_per_chirp").get<int>();
        beat.config.validate();

        const auto bytes = fs::file_size(directory / beat_file);
        const std::size_t frame = sizeof(std::complex<float>) * beat.config.samples_per_chirp;
        if (bytes % frame != 0)
            throw DataError("beat.c64 length is not a whole number of chirps");
        beat.n_chirps = std::int64_t(bytes / frame);
        const std::int64_t expect =
            std::llround(s.duration_s * beat.config.frame_rate_hz);
        if (beat.n_chirps != expect)
            throw DataError("beat.c64 length disagrees with manifest duration");
        beat.data.resize(std::size_t(beat.n_chirps) * beat.config.samples_per_chirp);
        std::ifstream f(directory / beat_file, std::ios::binary);
        f.read(reinterpret_cast<char*>(beat.data.data()), std::streamsize(bytes));
        if (!f) throw DataError("short read: " + beat_file);
        s.beat = std::move(beat);
    }

    {
        std::ifstream f(directory / manifest["files"].value("spo2", "spo2.csv"));
        if (!f) throw DataError("missing spo2 file");
        std::string line;
        std::getline(f, line);  // header
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw DataError("malformed spo2.csv row: " + line);
            try {
                s.spo2.samples.push_back(std::stof(line.substr(comma + 1)));
            } catch (const std::logic_error&) {
                throw DataError("malformed spo2.csv row: " + line);
            }
        }
    }

    {
        std::ifstream f(directory / manifest["files"].value("events", "events.jsonl"));
        if (!f) throw DataError("missing events file");
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw DataError("malformed events.jsonl line: " + std::string(e.what()));
            }
            EventAnnotation e;
            e.category = event_category_from_string(j.at("type").get<std::string>());
            e.t_start_s = j.at("t_start_s").get<double>();
            e.t_end_s = j.at("t_end_s").get<double>();
            s.events.push_back(e);
        }
    }

    s.validate();
    return s;
}

void save_detections(const std::vector<DetectedSegment>& dets, const fs::path& file) {
    std::ostringstream out;
    for (const auto& d : dets) out << det_to_json(d).dump() << "\n";
    write_file(file, out.str());
}

std::vector<DetectedSegment> load_detections(const fs::path& file) {
    std::ifstream f(file);
    if (!f) throw DataError("missing detections file: " + file.string());
    std::vector<DetectedSegment> dets;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("malformed detections line: " + std::string(e.what()));
        }
        DetectedSegment d;
        d.category = event_category_from_string(j.at("type").get<std::string>());
        d.t_start_s = j.at("t_start_s").get<double>();
        d.t_end_s = j.at("t_end_s").get<double>();
        d.score = j.at("score").get<double>();
        d.validate();
        dets.push_back(d);
    }
    return dets;
}

}  // namespace rosa
