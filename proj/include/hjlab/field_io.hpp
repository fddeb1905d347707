#pragma once

// Snapshot export: CSV with header "t,x1,...,xN,u" (17 significant digits)
// plus a JSON sidecar describing the GridSpec.

#include "hjlab/grid.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace hjlab {

void to_json(nlohmann::json& j, const GridSpec& spec);
void from_json(const nlohmann::json& j, GridSpec& spec);

/// Writes every slice, or only the given one.
void write_field_csv(const ScalarField& f, std::ostream& out, std::optional<std::size_t> slice = std::nullopt);

/// Reads a full-field CSV written by write_field_csv back onto the given lattice.
ScalarField read_field_csv(const GridSpec& spec, std::istream& in);

struct SnapshotFiles {
    std::filesystem::path csv;
    std::filesystem::path descriptor;
};

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json. The descriptor carries the
/// GridSpec and, for single-slice snapshots, the slice index and its time.
SnapshotFiles write_snapshot(const ScalarField& f, const std::filesystem::path& dir, const std::string& stem,
                             std::optional<std::size_t> slice = std::nullopt);

GridSpec read_grid_descriptor(const std::filesystem::path& path);

}  // namespace hjlab
