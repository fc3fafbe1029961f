#pragma once

// Append-only storage. Layout of a store directory:
//
//   records.jsonl         one JSON object per line, {"type": ..., ...}, in commit order
//   sequences/<id>.json   sample and upload sequences in the ingestion format
//
// A store without a directory keeps everything in memory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rehab/error.hpp"
#include "rehab/io.hpp"

namespace rehab::service {

inline constexpr const char* kStoreEnv = "REHAB_STORE_DIR";

inline std::string store_dir_from_env(const std::string& fallback = "rehab-store") {
    const char* v = std::getenv(kStoreEnv);
    return v && *v ? v : fallback;
}

class RecordStore {
public:
    RecordStore() = default;

    // Opens (creating if needed) a store directory and loads its records.
    static RecordStore open(const std::filesystem::path& dir) {
        RecordStore s;
        s.dir_ = dir;
        std::error_code ec;
        std::filesystem::create_directories(dir / "sequences", ec);
        if (ec) throw Error(ErrorKind::io, "cannot create store " + dir.string() + ": " + ec.message());
        const auto log = dir / "records.jsonl";
        if (!std::filesystem::exists(log)) return s;
        std::ifstream in(log, std::ios::binary);
        if (!in) throw Error(ErrorKind::io, "cannot read " + log.string());
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (line.empty()) continue;
            try {
                s.records_.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::parse_error&) {
                throw Error(ErrorKind::parse, log.string() + ":" + std::to_string(number) + ": malformed record");
            }
        }
        return s;
    }

    const std::optional<std::filesystem::path>& dir() const noexcept { return dir_; }
    const std::vector<nlohmann::json>& records() const noexcept { return records_; }

    void append(const nlohmann::json& record) {
        if (dir_) {
            std::ofstream out(*dir_ / "records.jsonl", std::ios::binary | std::ios::app);
            out << record.dump() << '\n';
            out.flush();
            if (!out) throw Error(ErrorKind::io, "cannot append to the record log");
        }
        records_.push_back(record);
    }

    // Returns the reference recorded in the log.
    std::string put_sequence(const std::string& id, const std::string& document) {
        const std::string ref = "sequences/" + id + ".json";
        if (dir_) write_file((*dir_ / ref).string(), document);
        else blobs_[ref] = document;
        return ref;
    }

    std::string get_sequence(const std::string& ref) const {
        if (dir_) return read_file((*dir_ / ref).string());
        const auto it = blobs_.find(ref);
        if (it == blobs_.end()) throw Error(ErrorKind::not_found, "no stored sequence " + ref);
        return it->second;
    }

private:
    std::optional<std::filesystem::path> dir_;
    std::vector<nlohmann::json> records_;
    std::map<std::string, std::string> blobs_;
};

}  // namespace rehab::service
