#include "kneadforge/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kneadforge {

namespace {

bool finite3(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

uint32_t read_u32_le(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

float read_f32_le(const unsigned char* p) {
    uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

void append_f32_le(std::string& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    out.push_back(char(bits & 0xff));
    out.push_back(char((bits >> 8) & 0xff));
    out.push_back(char((bits >> 16) & 0xff));
    out.push_back(char((bits >> 24) & 0xff));
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

// --- ASCII STL ---------------------------------------------------------

struct AsciiCursor {
    std::istringstream stream;
    size_t line = 0;
    std::string current;

    explicit AsciiCursor(const std::string& text) : stream(text) {}

    bool next_line() {
        while (std::getline(stream, current)) {
            ++line;
            // trim
            size_t b = current.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                continue;
            size_t e = current.find_last_not_of(" \t\r");
            current = current.substr(b, e - b + 1);
            if (!current.empty())
                return true;
        }
        return false;
    }
};

bool starts_with(const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
}

Vec3 parse_vec3_tail(const std::string& line, size_t word_count, size_t line_no) {
    std::istringstream ss(line);
    std::string w;
    for (size_t i = 0; i < word_count; ++i)
        ss >> w;
    Vec3 v;
    if (!(ss >> v.x >> v.y >> v.z))
        throw ParseError("STL ASCII: malformed coordinates at line " + std::to_string(line_no));
    if (!finite3(v))
        throw ParseError("STL ASCII: non-finite coordinate at line " + std::to_string(line_no));
    return v;
}

bool try_read_ascii_stl(const std::string& text, TriangleMesh& mesh, std::string& error) {
    AsciiCursor cur(text);
    if (!cur.next_line() || !starts_with(cur.current, "solid")) {
        error = "missing 'solid' header";
        return false;
    }
    mesh = TriangleMesh{};
    try {
        while (cur.next_line()) {
            if (starts_with(cur.current, "endsolid"))
                break;
            if (!starts_with(cur.current, "facet normal")) {
                error = "expected 'facet normal' at line " + std::to_string(cur.line);
                return false;
            }
            Vec3 n = parse_vec3_tail(cur.current, 2, cur.line);
            if (!cur.next_line() || cur.current != "outer loop") {
                error = "expected 'outer loop' at line " + std::to_string(cur.line);
                return false;
            }
            std::array<uint32_t, 3> tri;
            for (int k = 0; k < 3; ++k) {
                if (!cur.next_line() || !starts_with(cur.current, "vertex")) {
                    error = "expected 'vertex' at line " + std::to_string(cur.line);
                    return false;
                }
                Vec3 v = parse_vec3_tail(cur.current, 1, cur.line);
                tri[k] = uint32_t(mesh.vertices.size());
                mesh.vertices.push_back(v);
            }
            if (!cur.next_line() || cur.current != "endloop") {
                error = "expected 'endloop' at line " + std::to_string(cur.line);
                return false;
            }
            if (!cur.next_line() || cur.current != "endfacet") {
                error = "expected 'endfacet' at line " + std::to_string(cur.line);
                return false;
            }
            mesh.normals.push_back(n);
            mesh.triangles.push_back(tri);
        }
    } catch (const ParseError& e) {
        error = e.what();
        return false;
    }
    return !mesh.triangles.empty();
}

// --- binary STL --------------------------------------------------------

constexpr size_t kBinaryHeader = 80;
constexpr size_t kFacetRecord = 50;

TriangleMesh read_binary_stl(const std::vector<char>& data, const std::filesystem::path& path) {
    if (data.size() < kBinaryHeader + 4)
        throw ParseError("STL binary: file truncated before facet count (size " +
                         std::to_string(data.size()) + " bytes): " + path.string());
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    uint32_t count = read_u32_le(bytes + kBinaryHeader);
    size_t expected = kBinaryHeader + 4 + size_t(count) * kFacetRecord;
    if (data.size() < expected) {
        size_t complete = (data.size() - kBinaryHeader - 4) / kFacetRecord;
        throw ParseError("STL binary: declares " + std::to_string(count) + " facets but data ends at byte " +
                         std::to_string(data.size()) + " (facet " + std::to_string(complete) +
                         " starts at byte " + std::to_string(kBinaryHeader + 4 + complete * kFacetRecord) + ")");
    }

    TriangleMesh mesh;
    mesh.vertices.reserve(size_t(count) * 3);
    mesh.triangles.reserve(count);
    mesh.normals.reserve(count);
    for (uint32_t f = 0; f < count; ++f) {
        const unsigned char* rec = bytes + kBinaryHeader + 4 + size_t(f) * kFacetRecord;
        Vec3 vals[4];
        for (int k = 0; k < 4; ++k) {
            vals[k] = {double(read_f32_le(rec + 12 * k + 0)), double(read_f32_le(rec + 12 * k + 4)),
                       double(read_f32_le(rec + 12 * k + 8))};
            if (!finite3(vals[k]))
                throw ParseError("STL binary: non-finite coordinate in facet " + std::to_string(f) +
                                 " at byte " + std::to_string(kBinaryHeader + 4 + size_t(f) * kFacetRecord));
        }
        std::array<uint32_t, 3> tri;
        for (int k = 0; k < 3; ++k) {
            tri[k] = uint32_t(mesh.vertices.size());
            mesh.vertices.push_back(vals[k + 1]);
        }
        mesh.normals.push_back(vals[0]);
        mesh.triangles.push_back(tri);
        if (triangle_area(vals[1], vals[2], vals[3]) == 0.0)
            mesh.degenerate_facets.push_back(f);
    }
    return mesh;
}

}  // namespace

void TriangleMesh::validate() const {
    for (size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        for (uint32_t idx : t)
            if (idx >= vertices.size())
                throw ParseError("mesh: triangle " + std::to_string(i) + " references vertex " +
                                 std::to_string(idx) + " out of " + std::to_string(vertices.size()));
        const Vec3& a = vertices[t[0]];
        const Vec3& b = vertices[t[1]];
        const Vec3& c = vertices[t[2]];
        if (!finite3(a) || !finite3(b) || !finite3(c))
            throw ParseError("mesh: non-finite coordinate in triangle " + std::to_string(i));
    }
}

TriangleMesh read_stl(const std::filesystem::path& path) {
    std::vector<char> data = read_file_bytes(path);
    if (data.size() >= 5 && std::memcmp(data.data(), "solid", 5) == 0) {
        TriangleMesh mesh;
        std::string error;
        std::string text(data.begin(), data.end());
        if (try_read_ascii_stl(text, mesh, error)) {
            for (size_t f = 0; f < mesh.triangles.size(); ++f) {
                const auto& t = mesh.triangles[f];
                if (triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) == 0.0)
                    mesh.degenerate_facets.push_back(uint32_t(f));
            }
            return mesh;
        }
        // "solid" prefix but no parseable ASCII grammar: fall through to binary.
    }
    return read_binary_stl(data, path);
}

void write_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::string out;
    out.resize(kBinaryHeader, '\0');
    uint32_t count = uint32_t(mesh.triangles.size());
    out.push_back(char(count & 0xff));
    out.push_back(char((count >> 8) & 0xff));
    out.push_back(char((count >> 16) & 0xff));
    out.push_back(char((count >> 24) & 0xff));
    for (size_t f = 0; f < mesh.triangles.size(); ++f) {
        const auto& t = mesh.triangles[f];
        Vec3 n = f < mesh.normals.size()
                     ? mesh.normals[f]
                     : (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).normalized();
        const Vec3 rows[4] = {n, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
        for (const Vec3& v : rows) {
            append_f32_le(out, float(v.x));
            append_f32_le(out, float(v.y));
            append_f32_le(out, float(v.z));
        }
        out.push_back('\0');
        out.push_back('\0');
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ParseError("cannot write file: " + path.string());
    os.write(out.data(), std::streamsize(out.size()));
}

void write_stl_ascii(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ParseError("cannot write file: " + path.string());
    os << "solid kneadforge\n";
    for (size_t f = 0; f < mesh.triangles.size(); ++f) {
        const auto& t = mesh.triangles[f];
        Vec3 n = f < mesh.normals.size()
                     ? mesh.normals[f]
                     : (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).normalized();
        os << "  facet normal " << format_double(n.x) << ' ' << format_double(n.y) << ' ' << format_double(n.z)
           << "\n    outer loop\n";
        for (int k = 0; k < 3; ++k) {
            const Vec3& v = mesh.vertices[t[k]];
            os << "      vertex " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
               << '\n';
        }
        os << "    endloop\n  endfacet\n";
    }
    os << "endsolid kneadforge\n";
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double_field(const std::string& field, size_t line_no) {
    double v = 0.0;
    const char* b = field.data();
    const char* e = b + field.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ParseError("cloud: malformed number '" + field + "' at line " + std::to_string(line_no));
    if (!std::isfinite(v))
        throw ParseError("cloud: non-finite value at line " + std::to_string(line_no));
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ')
            field.erase(field.begin());
        out.push_back(field);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

void write_cloud_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ParseError("cannot write file: " + path.string());
    const bool layered = cloud.has_layers();
    os << (layered ? "x,y,z,layer\n" : "x,y,z\n");
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z);
        if (layered)
            os << ',' << cloud.layer[i];
        os << '\n';
    }
}

PointCloud read_cloud_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ParseError("cannot open file: " + path.string());
    std::string line;
    size_t line_no = 0;
    if (!std::getline(is, line))
        throw ParseError("cloud CSV: empty file: " + path.string());
    ++line_no;
    auto header = split_csv(line);
    bool layered;
    if (header.size() == 3 && header[0] == "x" && header[1] == "y" && header[2] == "z")
        layered = false;
    else if (header.size() == 4 && header[0] == "x" && header[1] == "y" && header[2] == "z" && header[3] == "layer")
        layered = true;
    else
        throw ParseError("cloud CSV: missing or invalid header (want 'x,y,z[,layer]') in " + path.string());

    PointCloud cloud;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        auto fields = split_csv(line);
        if (fields.size() != (layered ? 4u : 3u))
            throw ParseError("cloud CSV: wrong field count at line " + std::to_string(line_no));
        Vec3 p{parse_double_field(fields[0], line_no), parse_double_field(fields[1], line_no),
               parse_double_field(fields[2], line_no)};
        cloud.points.push_back(p);
        if (layered) {
            int idx = 0;
            auto res = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), idx);
            if (res.ec != std::errc{} || idx < 0)
                throw ParseError("cloud CSV: bad layer index at line " + std::to_string(line_no));
            cloud.layer.push_back(idx);
        }
    }
    return cloud;
}

void write_cloud_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ParseError("cannot write file: " + path.string());
    const bool layered = cloud.has_layers();
    os << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
       << "\nproperty double x\nproperty double y\nproperty double z\n";
    if (layered)
        os << "property int layer\n";
    os << "end_header\n";
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z);
        if (layered)
            os << ' ' << cloud.layer[i];
        os << '\n';
    }
}

PointCloud read_cloud_ply(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ParseError("cannot open file: " + path.string());
    std::string line;
    size_t line_no = 0;
    auto next = [&]() {
        if (!std::getline(is, line))
            throw ParseError("PLY: unexpected end of file at line " + std::to_string(line_no));
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        ++line_no;
    };
    next();
    if (line != "ply")
        throw ParseError("PLY: missing 'ply' magic in " + path.string());
    next();
    if (line != "format ascii 1.0")
        throw ParseError("PLY: unsupported format at line " + std::to_string(line_no));

    size_t vertex_count = 0;
    bool layered = false;
    while (true) {
        next();
        if (line == "end_header")
            break;
        if (starts_with(line, "element vertex "))
            vertex_count = std::stoull(line.substr(15));
        else if (line == "property int layer")
            layered = true;
        else if (starts_with(line, "element ") || starts_with(line, "property ") || starts_with(line, "comment "))
            continue;
        else
            throw ParseError("PLY: unexpected header line " + std::to_string(line_no) + ": " + line);
    }

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    for (size_t i = 0; i < vertex_count; ++i) {
        next();
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z))
            throw ParseError("PLY: malformed vertex at line " + std::to_string(line_no));
        if (!finite3(p))
            throw ParseError("PLY: non-finite vertex at line " + std::to_string(line_no));
        cloud.points.push_back(p);
        if (layered) {
            int idx = 0;
            if (!(ss >> idx) || idx < 0)
                throw ParseError("PLY: bad layer index at line " + std::to_string(line_no));
            cloud.layer.push_back(idx);
        }
    }
    return cloud;
}

}  // namespace

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
    if (cloud.has_layers() && cloud.layer.size() != cloud.points.size())
        throw ParseError("cloud: layer column size mismatch");
    if (format == CloudFormat::Csv)
        write_cloud_csv(cloud, path);
    else
        write_cloud_ply(cloud, path);
}

PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format) {
    return format == CloudFormat::Csv ? read_cloud_csv(path) : read_cloud_ply(path);
}

}  // namespace kneadforge
