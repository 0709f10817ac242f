#include "tabml/service/dataset_store.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "tabml/core/error.hpp"
#include "tabml/visual/log.hpp"

namespace tabml::service {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

data::Schema SchemaFromJson(const Json& j) {
  data::Schema schema;
  for (const auto& c : j.at("columns")) {
    data::ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    const std::string kind = c.at("kind").get<std::string>();
    for (auto k : {data::ColumnKind::kContinuous, data::ColumnKind::kBinary, data::ColumnKind::kCategorical}) {
      if (data::ColumnKindName(k) == kind) col.kind = k;
    }
    col.missing_count = c.at("missing_count").get<std::size_t>();
    col.distinct_count = c.at("distinct_count").get<std::size_t>();
    col.numeric = c.value("numeric", false);
    schema.columns.push_back(std::move(col));
  }
  return schema;
}

std::string NewId() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "ds_%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

std::string SafeName(const std::string& filename) {
  std::string base = fs::path(filename).filename().string();
  std::string out;
  for (char c : base) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  if (out.empty() || out.front() == '.') out = "data" + out;
  return out;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  Require(static_cast<bool>(f), ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Json ToJson(const DatasetRecord& record) {
  return {{"dataset_id", record.dataset_id},
          {"filename", record.filename},
          {"bytes", record.bytes},
          {"schema", data::ToJson(record.schema)},
          {"uploaded_at", record.uploaded_at}};
}

data::TableFormat GuessFormat(const std::string& filename, std::string_view content) {
  std::string lower = data::ToLower(filename);
  auto ends = [&](std::string_view suffix) {
    return lower.size() >= suffix.size() && lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends(".tsv") || ends(".tab")) return data::TableFormat::kTsv;
  if (ends(".csv")) return data::TableFormat::kCsv;
  const std::string_view header = content.substr(0, content.find('\n'));
  if (header.find('\t') != std::string_view::npos && header.find(',') == std::string_view::npos) {
    return data::TableFormat::kTsv;
  }
  return data::TableFormat::kCsv;
}

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  std::vector<DatasetRecord> loaded;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const fs::path meta = entry.path() / "record.json";
    if (!entry.is_directory() || !fs::exists(meta)) continue;
    try {
      const Json j = Json::parse(ReadAll(meta));
      DatasetRecord r;
      r.dataset_id = j.at("dataset_id").get<std::string>();
      r.filename = j.at("filename").get<std::string>();
      r.bytes = j.at("bytes").get<std::size_t>();
      r.schema = SchemaFromJson(j.at("schema"));
      r.uploaded_at = j.at("uploaded_at").get<std::string>();
      r.path = entry.path() / j.at("stored_as").get<std::string>();
      loaded.push_back(std::move(r));
    } catch (const std::exception&) {
      continue;  // half-written upload
    }
  }
  std::sort(loaded.begin(), loaded.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
    return std::tie(a.uploaded_at, a.dataset_id) < std::tie(b.uploaded_at, b.dataset_id);
  });
  for (auto& r : loaded) {
    order_.push_back(r.dataset_id);
    records_.emplace(r.dataset_id, std::move(r));
  }
}

DatasetRecord DatasetStore::Store(const std::string& id, const std::string& filename, std::string_view content) {
  const data::RawTable table = data::ParseTable(content, GuessFormat(filename, content), filename);
  DatasetRecord r;
  r.dataset_id = id;
  r.filename = filename;
  r.bytes = content.size();
  r.schema = data::InferSchema(table);
  r.uploaded_at = visual::NowTimestamp();
  const fs::path dir = root_ / id;
  const fs::path tmp = root_ / (id + ".tmp");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::string stored = SafeName(filename);
  {
    std::ofstream f(tmp / stored, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    Require(static_cast<bool>(f), ErrorCode::kInternal, "cannot store dataset " + id);
  }
  Json meta = ToJson(r);
  meta["stored_as"] = stored;
  {
    std::ofstream f(tmp / "record.json");
    f << meta.dump(2) << '\n';
    Require(static_cast<bool>(f), ErrorCode::kInternal, "cannot store dataset record " + id);
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
  r.path = dir / stored;
  std::lock_guard lock(mu_);
  if (!records_.count(id)) order_.push_back(id);
  records_[id] = r;
  return r;
}

DatasetRecord DatasetStore::Add(const std::string& filename, std::string_view content) {
  return Store(NewId(), filename, content);
}

DatasetRecord DatasetStore::AddFile(const std::string& dataset_id, const fs::path& file) {
  if (auto existing = Get(dataset_id)) return *existing;
  return Store(dataset_id, file.filename().string(), ReadAll(file));
}

std::optional<DatasetRecord> DatasetStore::Get(const std::string& dataset_id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(dataset_id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<DatasetRecord> DatasetStore::List() const {
  std::lock_guard lock(mu_);
  std::vector<DatasetRecord> out;
  for (const auto& id : order_) out.push_back(records_.at(id));
  return out;
}

data::RawTable DatasetStore::Load(const std::string& dataset_id) const {
  const auto r = Get(dataset_id);
  Require(r.has_value(), ErrorCode::kNotFound, "unknown dataset " + dataset_id);
  const std::string content = ReadAll(r->path);
  data::RawTable table = data::ParseTable(content, GuessFormat(r->filename, content), r->filename);
  table.source_path = r->filename;
  return table;
}

}  // namespace tabml::service
