#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mlsib/surface.hpp"

namespace mlsib {

namespace {

static_assert(std::endian::native == std::endian::little, "STL I/O assumes a little-endian host");

class VertexPool {
public:
    explicit VertexPool(TriMesh& mesh) : mesh_(mesh) {}

    int add(const Vec3& x)
    {
        auto [it, inserted] = index_.try_emplace(x, static_cast<int>(mesh_.vertices.size()));
        if (inserted) mesh_.vertices.push_back(x);
        return it->second;
    }

private:
    TriMesh& mesh_;
    std::map<Vec3, int> index_;
};

bool degenerate(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const double area2 = norm(cross(b - a, c - a));
    const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
    return !(area2 > 1e-14 * scale * scale);
}

class Tokenizer {
public:
    explicit Tokenizer(const std::string& text) : text_(text) {}

    bool next(std::string& token)
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) return false;
        start_ = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        token.assign(text_, start_, pos_ - start_);
        return true;
    }

    std::string expect_any()
    {
        std::string t;
        if (!next(t)) throw ParseError("unexpected end of ASCII STL", pos_);
        return t;
    }

    void expect(const char* word)
    {
        const std::string t = expect_any();
        if (t != word) throw ParseError(std::string("expected '") + word + "', found '" + t + "'", start_);
    }

    double number()
    {
        const std::string t = expect_any();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + t + "'", start_);
        }
    }

    std::size_t token_start() const { return start_; }

    void skip_line()
    {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t start_ = 0;
};

StlLoad parse_ascii(const std::string& bytes)
{
    StlLoad out;
    VertexPool pool(out.mesh);
    Tokenizer tok(bytes);
    tok.expect("solid");
    tok.skip_line();  // optional solid name

    std::string t;
    bool closed = false;
    while (tok.next(t)) {
        if (t == "endsolid") {
            closed = true;
            break;
        }
        if (t != "facet") throw ParseError("expected 'facet' or 'endsolid', found '" + t + "'", tok.token_start());
        tok.expect("normal");
        for (int i = 0; i < 3; ++i) tok.number();
        tok.expect("outer");
        tok.expect("loop");
        std::array<Vec3, 3> v{};
        for (auto& x : v) {
            tok.expect("vertex");
            for (int i = 0; i < 3; ++i) x[i] = tok.number();
        }
        tok.expect("endloop");
        tok.expect("endfacet");
        if (degenerate(v[0], v[1], v[2])) {
            ++out.dropped_degenerate;
            continue;
        }
        out.mesh.triangles.push_back({pool.add(v[0]), pool.add(v[1]), pool.add(v[2])});
    }
    if (!closed) throw ParseError("ASCII STL missing 'endsolid'", bytes.size());
    return out;
}

StlLoad parse_binary(const std::string& bytes)
{
    if (bytes.size() < 84) throw ParseError("binary STL shorter than its 84-byte header", bytes.size());
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    const std::size_t needed = 84 + static_cast<std::size_t>(count) * 50;
    if (bytes.size() < needed) {
        const std::size_t complete = (bytes.size() - 84) / 50;
        throw ParseError("binary STL declares " + std::to_string(count) + " facets but only " +
                             std::to_string(complete) + " are present",
                         84 + complete * 50);
    }

    StlLoad out;
    out.binary = true;
    VertexPool pool(out.mesh);
    for (std::uint32_t f = 0; f < count; ++f) {
        const char* rec = bytes.data() + 84 + static_cast<std::size_t>(f) * 50;
        float vals[12];
        std::memcpy(vals, rec, sizeof(vals));
        std::array<Vec3, 3> v{};
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 3; ++c) v[i][c] = static_cast<double>(vals[3 + 3 * i + c]);
        for (const auto& x : v)
            for (double c : x)
                if (!std::isfinite(c)) throw ParseError("non-finite vertex coordinate", 84 + f * 50 + 12);
        if (degenerate(v[0], v[1], v[2])) {
            ++out.dropped_degenerate;
            continue;
        }
        out.mesh.triangles.push_back({pool.add(v[0]), pool.add(v[1]), pool.add(v[2])});
    }
    return out;
}

bool looks_ascii(const std::string& bytes)
{
    std::size_t i = 0;
    while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
    if (bytes.compare(i, 5, "solid") != 0) return false;
    // Some binary exporters also start their header with "solid".
    if (bytes.size() >= 84) {
        std::uint32_t count = 0;
        std::memcpy(&count, bytes.data() + 80, 4);
        if (84 + static_cast<std::size_t>(count) * 50 == bytes.size()) return false;
    }
    return bytes.find("facet", i) != std::string::npos || bytes.find("endsolid", i) != std::string::npos;
}

Vec3 facet_normal(const TriMesh& mesh, const std::array<int, 3>& tri)
{
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
    Vec3 n = cross(b - a, c - a);
    const double len = norm(n);
    return len > 0.0 ? (1.0 / len) * n : Vec3{0.0, 0.0, 0.0};
}

}  // namespace

StlLoad parse_stl(const std::string& bytes)
{
    return looks_ascii(bytes) ? parse_ascii(bytes) : parse_binary(bytes);
}

StlLoad load_stl(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open STL file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_stl(ss.str());
}

void write_stl_binary(const TriMesh& mesh, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write STL file '" + path + "'");
    char header[80] = {};
    std::strncpy(header, "mlsib binary STL", sizeof(header) - 1);
    out.write(header, 80);
    const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& tri : mesh.triangles) {
        float vals[12];
        const Vec3 n = facet_normal(mesh, tri);
        for (int c = 0; c < 3; ++c) vals[c] = static_cast<float>(n[c]);
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 3; ++c)
                vals[3 + 3 * i + c] = static_cast<float>(mesh.vertices[static_cast<std::size_t>(tri[i])][c]);
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
        const std::uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
}

void write_stl_ascii(const TriMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write STL file '" + path + "'");
    out.precision(17);
    out << "solid mlsib\n";
    for (const auto& tri : mesh.triangles) {
        const Vec3 n = facet_normal(mesh, tri);
        out << "  facet normal " << n[0] << ' ' << n[1] << ' ' << n[2] << "\n    outer loop\n";
        for (int i = 0; i < 3; ++i) {
            const Vec3& v = mesh.vertices[static_cast<std::size_t>(tri[i])];
            out << "      vertex " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
        }
        out << "    endloop\n  endfacet\n";
    }
    out << "endsolid mlsib\n";
}

}  // namespace mlsib
