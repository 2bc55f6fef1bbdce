#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kneadforge/geometry.hpp"

namespace kneadforge {

// Indexed triangle soup as read from STL. Vertices are not deduplicated:
// slicing never needs topology and keeping the raw facets preserves
// bit-exactness on round trips. Units are millimeters throughout.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<uint32_t, 3>> triangles;
    std::vector<Vec3> normals;                 // per facet, may be empty
    std::vector<uint32_t> degenerate_facets;   // zero-area facets, retained but flagged

    size_t facet_count() const { return triangles.size(); }
    void validate() const;  // index bounds, finiteness, distinct corners
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> layer;  // optional per-point layer index; empty or same size as points

    bool has_layers() const { return !layer.empty(); }
    size_t size() const { return points.size(); }
};

enum class CloudFormat { Csv, PlyAscii };

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// STL, auto-detecting ASCII vs binary: a file is treated as ASCII only when it
// starts with "solid" and the facet grammar actually parses; anything
// ambiguous is read as binary. Errors carry the byte or line offset.
TriangleMesh read_stl(const std::filesystem::path& path);
void write_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path);
void write_stl_ascii(const TriangleMesh& mesh, const std::filesystem::path& path);

// Point clouds as CSV ("x,y,z[,layer]", shortest round-trip decimals) or
// PLY-ASCII 1.0 with double properties.
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);

// Format helpers shared by every writer so serialized output is identical
// across runs and platforms.
std::string format_double(double v);

}  // namespace kneadforge
