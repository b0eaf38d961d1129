#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/error.hpp"

namespace arstage::content {

/// Malformed project file. `where` is "line L, column C" for syntax errors
/// or a field path such as "items[2].scale[0]" for schema errors.
class ProjectFileError : public Error {
 public:
  ProjectFileError(std::string where, const std::string& message)
      : Error(where + ": " + message), where_(std::move(where)) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// The file declares a format_version this build cannot read.
class VersionMismatchError : public Error {
 public:
  explicit VersionMismatchError(int found)
      : Error("incompatible project format_version " + std::to_string(found) + " (supported: " +
              std::to_string(Project::kFormatVersion) + ")"),
        found_(found) {}
  [[nodiscard]] int found() const { return found_; }

 private:
  int found_;
};

struct LoadOptions {
  /// Reject unknown fields instead of collecting warnings.
  bool strict = false;
};

std::string project_to_json(const Project& project);
Project project_from_json(std::string_view text, const LoadOptions& options = {},
                          std::vector<std::string>* warnings = nullptr);

/// Writes through a temporary file and renames it into place.
void save_project(const Project& project, const std::filesystem::path& path);
/// Throws Error if the file cannot be read, ProjectFileError / ValidationError
/// / VersionMismatchError for bad content.
Project load_project(const std::filesystem::path& path, const LoadOptions& options = {},
                     std::vector<std::string>* warnings = nullptr);

}  // namespace arstage::content
