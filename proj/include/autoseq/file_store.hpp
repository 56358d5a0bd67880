#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "autoseq/error.hpp"
#include "autoseq/table.hpp"

namespace autoseq {

// Append-log table file. Line 1 is the schema; every later line is either
// a row object (keys in declared column order) or a deletion marker
// {"tombstone":{"column":...,"id":...,"match":...}} whose match ordinal
// picks the n-th surviving row with that cell value at apply time.
//
// Writers take an advisory flock on the log file, so separate handles and
// separate processes serialize on the same table. A recursive mutex keeps
// threads sharing this handle out of each other's way, and every lock
// acquisition re-reads whatever the log gained since the last look.
class FileTable final : public Table {
 public:
  static std::shared_ptr<FileTable> open(std::filesystem::path path) {
    auto table = std::shared_ptr<FileTable>(new FileTable(std::move(path)));
    SharedGuard guard(*table);  // initial load
    return table;
  }

  ~FileTable() override {
    if (fd_ >= 0) ::close(fd_);
  }

  FileTable(const FileTable&) = delete;
  FileTable& operator=(const FileTable&) = delete;

  const TableSchema& schema() const override { return *schema_; }

  void insert_row(const Row& row) override {
    ExclusiveGuard guard(*this);
    Row canonical = validated(row, *schema_);
    append(row_to_json(canonical, *schema_).dump() + "\n");
    rows_.push_back(std::move(canonical));
  }

  std::size_t delete_row(const std::string& column, std::int64_t id) override {
    ExclusiveGuard guard(*this);
    if (schema_->find(column) == nullptr) {
      throw SchemaError("table '" + schema_->name() + "' has no column '" +
                        column + "'");
    }
    const Value needle{id};
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].at(column) == needle) hits.push_back(i);
    }
    if (hits.empty()) return 0;
    // Highest match ordinal first, so each marker still addresses the
    // row it named when the earlier markers are applied after it.
    std::string lines;
    for (std::size_t k = hits.size(); k-- > 0;) {
      lines += tombstone_line(column, id, k);
    }
    append(lines);
    for (std::size_t k = hits.size(); k-- > 0;) {
      rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(hits[k]));
    }
    return hits.size();
  }

  std::size_t count_rows() override {
    SharedGuard guard(*this);
    return rows_.size();
  }

  std::optional<Row> last_row() override {
    SharedGuard guard(*this);
    if (rows_.empty()) return std::nullopt;
    return rows_.back();
  }

  std::vector<Row> scan() override {
    SharedGuard guard(*this);
    return rows_;
  }

  TableLock exclusive_lock() override {
    lock_exclusive();
    return TableLock([this] { unlock_exclusive(); });
  }

  // Rewrites the log in place as header + surviving rows, dropping
  // tombstones and the rows they erased.
  void compact() {
    ExclusiveGuard guard(*this);
    std::string image = schema_->to_json().dump() + "\n";
    for (const Row& row : rows_) {
      image += row_to_json(row, *schema_).dump() + "\n";
    }
    if (::ftruncate(fd_, 0) != 0) {
      throw IoError("ftruncate failed on " + path_.string() + ": " +
                    std::strerror(errno));
    }
    write_at(image, 0);
    consumed_ = image.size();
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  explicit FileTable(std::filesystem::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_RDWR | O_CLOEXEC);
    if (fd_ < 0) {
      if (errno == ENOENT) {
        throw NotFoundError("no table log at " + path_.string());
      }
      throw IoError("cannot open " + path_.string() + ": " +
                    std::strerror(errno));
    }
  }

  struct SharedGuard {
    explicit SharedGuard(FileTable& table) : table_(table) {
      table_.mutex_.lock();
      flocked_ = table_.lock_depth_ == 0;
      if (flocked_) {
        table_.flock_op(LOCK_SH);
        try {
          table_.resync();
        } catch (...) {
          table_.flock_op(LOCK_UN);
          table_.mutex_.unlock();
          throw;
        }
      }
    }
    ~SharedGuard() {
      if (flocked_) table_.flock_op(LOCK_UN);
      table_.mutex_.unlock();
    }
    FileTable& table_;
    bool flocked_;
  };

  struct ExclusiveGuard {
    explicit ExclusiveGuard(FileTable& table) : table_(table) {
      table_.lock_exclusive();
    }
    ~ExclusiveGuard() { table_.unlock_exclusive(); }
    FileTable& table_;
  };

  void lock_exclusive() {
    mutex_.lock();
    if (lock_depth_ == 0) {
      flock_op(LOCK_EX);
      try {
        resync();
      } catch (...) {
        flock_op(LOCK_UN);
        mutex_.unlock();
        throw;
      }
    }
    ++lock_depth_;
  }

  void unlock_exclusive() {
    if (--lock_depth_ == 0) flock_op(LOCK_UN);
    mutex_.unlock();
  }

  void flock_op(int op) {
    while (::flock(fd_, op) != 0) {
      if (errno != EINTR) {
        throw IoError("flock failed on " + path_.string() + ": " +
                      std::strerror(errno));
      }
    }
  }

  std::uint64_t file_size() const {
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
      throw IoError("fstat failed on " + path_.string() + ": " +
                    std::strerror(errno));
    }
    return static_cast<std::uint64_t>(st.st_size);
  }

  // Brings rows_ up to date with the log. Called with the flock held, so
  // the file cannot end mid-line.
  void resync() {
    const std::uint64_t size = file_size();
    if (size == consumed_) return;
    if (size < consumed_) {
      // Another handle compacted the log; start over.
      rows_.clear();
      consumed_ = 0;
    }
    const std::string data = read_range(consumed_, size);
    std::size_t pos = 0;
    while (pos < data.size()) {
      const std::size_t nl = data.find('\n', pos);
      if (nl == std::string::npos) {
        throw DataIntegrityError("unterminated log line in " + path_.string());
      }
      const std::string_view line(data.data() + pos, nl - pos);
      if (consumed_ == 0 && pos == 0) {
        apply_header(line);
      } else {
        apply_line(line);
      }
      pos = nl + 1;
    }
    consumed_ = size;
  }

  void apply_header(std::string_view line) {
    TableSchema header = TableSchema::from_json(parse_json(line));
    if (schema_.has_value() && !(*schema_ == header)) {
      throw DataIntegrityError("schema header changed under " +
                               path_.string());
    }
    schema_ = std::move(header);
  }

  void apply_line(std::string_view line) {
    const nlohmann::json j = parse_json(line);
    if (j.is_object() && j.size() == 1 && j.contains("tombstone") &&
        j.at("tombstone").is_object()) {
      const auto& t = j.at("tombstone");
      if (!t.contains("column") || !t.contains("id") || !t.contains("match") ||
          !t.at("column").is_string() || !t.at("id").is_number_integer() ||
          !t.at("match").is_number_integer()) {
        throw DataIntegrityError("malformed tombstone in " + path_.string() +
                                 ": " + std::string(line));
      }
      apply_tombstone(t.at("column").get<std::string>(),
                      t.at("id").get<std::int64_t>(),
                      t.at("match").get<std::size_t>());
    } else {
      rows_.push_back(row_from_json(j, *schema_));
    }
  }

  void apply_tombstone(const std::string& column, std::int64_t id,
                       std::size_t match) {
    const Value needle{id};
    std::size_t seen = 0;
    if (schema_->find(column) != nullptr) {
      for (auto it = rows_.begin(); it != rows_.end(); ++it) {
        if (it->at(column) == needle) {
          if (seen == match) {
            rows_.erase(it);
            return;
          }
          ++seen;
        }
      }
    }
    throw DataIntegrityError("tombstone names a missing row in " +
                             path_.string());
  }

  nlohmann::json parse_json(std::string_view line) const {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataIntegrityError("unparsable log line in " + path_.string() +
                               ": " + std::string(line));
    }
    return j;
  }

  static std::string tombstone_line(const std::string& column, std::int64_t id,
                                    std::size_t match) {
    nlohmann::ordered_json t = {
        {"tombstone",
         {{"column", column}, {"id", id}, {"match", match}}}};
    return t.dump() + "\n";
  }

  std::string read_range(std::uint64_t from, std::uint64_t to) const {
    std::string data(static_cast<std::size_t>(to - from), '\0');
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n =
          ::pread(fd_, data.data() + done, data.size() - done,
                  static_cast<off_t>(from + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("pread failed on " + path_.string() + ": " +
                      std::strerror(errno));
      }
      if (n == 0) {
        throw IoError("log shrank during read: " + path_.string());
      }
      done += static_cast<std::size_t>(n);
    }
    return data;
  }

  // Appends under the exclusive lock; consumed_ already equals the file
  // end after resync.
  void append(const std::string& data) {
    write_at(data, consumed_);
    consumed_ += data.size();
  }

  void write_at(const std::string& data, std::uint64_t offset) {
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n =
          ::pwrite(fd_, data.data() + done, data.size() - done,
                   static_cast<off_t>(offset + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("pwrite failed on " + path_.string() + ": " +
                      std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::filesystem::path path_;
  int fd_ = -1;
  std::optional<TableSchema> schema_;
  std::vector<Row> rows_;       // survivors in insertion order
  std::uint64_t consumed_ = 0;  // log bytes reflected in rows_
  std::recursive_mutex mutex_;
  int lock_depth_ = 0;          // flock nesting, guarded by mutex_
};

// One log file per table under a store directory: <name>.tbl.
class FileStore final : public Store {
 public:
  static constexpr std::string_view kTableSuffix = ".tbl";

  explicit FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw NotFoundError("store directory does not exist: " + dir_.string());
    }
  }

  std::shared_ptr<Table> create_table(const TableSchema& schema) override {
    const std::filesystem::path path = table_path(schema.name());
    const int fd =
        ::open(path.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd < 0) {
      if (errno == EEXIST) {
        throw AlreadyExistsError("table already exists: " + schema.name());
      }
      throw IoError("cannot create " + path.string() + ": " +
                    std::strerror(errno));
    }
    const std::string header = schema.to_json().dump() + "\n";
    std::size_t done = 0;
    while (done < header.size()) {
      const ssize_t n = ::write(fd, header.data() + done, header.size() - done);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) {
        const int err = errno;
        ::close(fd);
        throw IoError("cannot write " + path.string() + ": " +
                      std::strerror(err));
      }
      done += static_cast<std::size_t>(n);
    }
    ::close(fd);
    std::lock_guard lock(mutex_);
    auto table = FileTable::open(path);
    cache_[schema.name()] = table;
    return table;
  }

  std::shared_ptr<Table> open_table(const std::string& name) override {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    auto table = FileTable::open(table_path(name));
    cache_[name] = table;
    return table;
  }

  bool has_table(const std::string& name) override {
    return std::filesystem::exists(table_path(name));
  }

  std::vector<std::string> table_names() override {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.is_regular_file() &&
          entry.path().extension() == kTableSuffix) {
        names.push_back(entry.path().stem().string());
      }
    }
    std::sort(names.begin(), names.end());
    return names;
  }

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path table_path(const std::string& name) const {
    if (name.empty() || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos) {
      throw SchemaError("invalid table name: '" + name + "'");
    }
    return dir_ / (name + std::string(kTableSuffix));
  }

  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<FileTable>> cache_;
};

}  // namespace autoseq
