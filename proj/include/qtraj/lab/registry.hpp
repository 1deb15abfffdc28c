#ifndef QTRAJ_LAB_REGISTRY_HPP
#define QTRAJ_LAB_REGISTRY_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/lab/io.hpp"

namespace qtraj::lab {

inline constexpr const char* tool_version = "0.3.0";

struct Artifact
{
    std::string kind; // trajectory | field | sweep | spectrum | comparison | beats | summary
    std::string path; // relative to the registry root
    std::string digest;
};

struct RunRecord
{
    std::string id;
    std::string task;
    std::string scenario_hash;
    std::string created;
    std::string version = tool_version;
    std::vector<Artifact> artifacts;
    nlohmann::json summary = nlohmann::json::object();

    nlohmann::json to_json() const
    {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& x : artifacts)
            a.push_back({{"kind", x.kind}, {"path", x.path}, {"digest", x.digest}});
        return {{"id", id},           {"task", task},   {"scenario_hash", scenario_hash}, {"created", created},
                {"version", version}, {"artifacts", a}, {"summary", summary}};
    }

    static RunRecord from_json(const nlohmann::json& j)
    {
        RunRecord r;
        r.id = j.at("id");
        r.task = j.at("task");
        r.scenario_hash = j.at("scenario_hash");
        r.created = j.at("created");
        r.version = j.at("version");
        for (const auto& a : j.at("artifacts"))
            r.artifacts.push_back({a.at("kind"), a.at("path"), a.at("digest")});
        r.summary = j.at("summary");
        return r;
    }
};

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Run registry rooted at an output directory:
///   <root>/runs/<id>/...        artifacts of one run
///   <root>/registry/<id>.json   run record
///   <root>/registry/index.jsonl one line per run, append-only
class Registry
{
public:
    explicit Registry(fs::path root)
        : root_(std::move(root))
    {
    }

    const fs::path& root() const { return root_; }
    fs::path index_path() const { return root_ / "registry" / "index.jsonl"; }
    fs::path record_path(const std::string& id) const { return root_ / "registry" / (id + ".json"); }
    fs::path run_dir(const std::string& id) const { return root_ / "runs" / id; }

    std::vector<nlohmann::json> index() const
    {
        std::vector<nlohmann::json> out;
        std::ifstream in(index_path());
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty())
                out.push_back(nlohmann::json::parse(line));
        }
        return out;
    }

    std::string next_id(const std::string& task, const std::string& hash) const
    {
        std::ostringstream os;
        os << task << "-" << hash.substr(0, 12) << "-" << std::setw(4) << std::setfill('0') << index().size() + 1;
        return os.str();
    }

    /// Writes an artifact into the run directory and returns its entry.
    Artifact write_artifact(const std::string& id, const std::string& kind, const std::string& name,
                            const std::string& content) const
    {
        const fs::path p = run_dir(id) / name;
        atomic_write(p, content);
        return {kind, fs::relative(p, root_).generic_string(), sha256_hex(content)};
    }

    void commit(const RunRecord& r) const
    {
        atomic_write(record_path(r.id), dump_json(r.to_json()));
        std::string idx;
        if (fs::exists(index_path()))
            idx = read_file(index_path());
        const nlohmann::json line = {{"id", r.id}, {"task", r.task}, {"scenario_hash", r.scenario_hash},
                                     {"created", r.created}};
        idx += line.dump() + "\n";
        atomic_write(index_path(), idx);
    }

    RunRecord find(const std::string& id) const
    {
        const auto p = record_path(id);
        if (!fs::exists(p))
            raise(ErrorKind::NotFound, "no run '" + id + "' in " + root_.string());
        return RunRecord::from_json(nlohmann::json::parse(read_file(p)));
    }

    /// Artifacts that are missing or whose digest no longer matches.
    std::vector<std::string> verify(const RunRecord& r) const
    {
        std::vector<std::string> bad;
        for (const auto& a : r.artifacts) {
            const auto p = root_ / a.path;
            if (!fs::exists(p) || file_digest(p) != a.digest)
                bad.push_back(a.path);
        }
        return bad;
    }

private:
    fs::path root_;
};

} // namespace qtraj::lab

#endif // QTRAJ_LAB_REGISTRY_HPP
