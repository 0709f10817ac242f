#ifndef TABML_SERVICE_DATASET_STORE_HPP_
#define TABML_SERVICE_DATASET_STORE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/data/schema.hpp"
#include "tabml/data/table.hpp"

namespace tabml::service {

struct DatasetRecord {
  std::string dataset_id;
  std::string filename;  // as uploaded
  std::size_t bytes = 0;
  data::Schema schema;
  std::string uploaded_at;
  std::filesystem::path path;  // stored file
};

nlohmann::json ToJson(const DatasetRecord& record);

// Datasets live under <root>/<dataset_id>/ as the stored file plus
// record.json. Records are immutable once added.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path root);

  // Parses and profiles `content`; throws EmptyTable or MalformedInput
  // before anything is written.
  DatasetRecord Add(const std::string& filename, std::string_view content);

  std::optional<DatasetRecord> Get(const std::string& dataset_id) const;
  std::vector<DatasetRecord> List() const;  // by upload order
  data::RawTable Load(const std::string& dataset_id) const;

  // Registers an existing file under a fixed id (bundled demo data).
  DatasetRecord AddFile(const std::string& dataset_id, const std::filesystem::path& file);

 private:
  DatasetRecord Store(const std::string& id, const std::string& filename, std::string_view content);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<std::string, DatasetRecord> records_;
  std::vector<std::string> order_;
};

// CSV unless the name ends in .tsv/.tab or the header has tabs and no commas.
data::TableFormat GuessFormat(const std::string& filename, std::string_view content);

}  // namespace tabml::service

#endif  // TABML_SERVICE_DATASET_STORE_HPP_
