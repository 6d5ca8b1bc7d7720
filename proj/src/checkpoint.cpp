#include "mlsib/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mlsib {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'L', 'S', 'I', 'B', 'C', 'K', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <class T>
    void put(const T& v)
    {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}
    template <class T>
    T get()
    {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string bytes(std::size_t n)
    {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > data_.size()) throw ParseError("checkpoint truncated", pos_);
    }
    std::string data_;
    std::size_t pos_ = 0;
};

void put_field(Writer& w, const char* name, const Field& f)
{
    const auto len = static_cast<std::uint8_t>(std::strlen(name));
    w.put(len);
    w.bytes(name, len);
    for (int a = 0; a < 3; ++a) w.put(static_cast<std::int32_t>(f.extent()[a]));
    for (int a = 0; a < 3; ++a) w.put(static_cast<std::int32_t>(f.ghost()[a]));
    w.put(static_cast<std::uint64_t>(f.data().size()));
    w.bytes(reinterpret_cast<const char*>(f.data().data()), f.data().size() * sizeof(double));
}

Field get_field(Reader& r, const std::string& expected)
{
    const std::size_t at = r.pos();
    const auto len = r.get<std::uint8_t>();
    const std::string name = r.bytes(len);
    if (name != expected) throw ParseError("expected field '" + expected + "', found '" + name + "'", at);
    std::array<int, 3> extent{}, ghost{};
    for (int a = 0; a < 3; ++a) extent[a] = r.get<std::int32_t>();
    for (int a = 0; a < 3; ++a) ghost[a] = r.get<std::int32_t>();
    for (int a = 0; a < 3; ++a)
        if (extent[a] < 1 || ghost[a] < 0 || ghost[a] > 1) throw ParseError("bad field layout", at);
    Field f(extent, ghost);
    const std::size_t count_at = r.pos();
    const auto count = r.get<std::uint64_t>();
    if (count != f.data().size()) throw ParseError("field size does not match its layout", count_at);
    for (auto& v : f.data()) v = r.get<double>();
    return f;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& cp)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
    Writer w(out);
    w.bytes(kMagic, 8);
    w.put(kVersion);
    w.put(static_cast<std::int32_t>(cp.grid.dim));
    for (int a = 0; a < 3; ++a) w.put(static_cast<std::int32_t>(cp.grid.cells[a]));
    for (int a = 0; a < 3; ++a) w.put(cp.grid.spacing[a]);
    for (int a = 0; a < 3; ++a) w.put(cp.grid.origin[a]);
    for (int a = 0; a < 3; ++a) w.put(static_cast<std::uint8_t>(cp.grid.periodic[a] ? 1 : 0));
    w.put(static_cast<std::uint8_t>(0));
    w.put(cp.grid.support_ratio);
    w.put(cp.state.time);
    w.put(static_cast<std::int64_t>(cp.step));

    const char* names[] = {"u", "v", "w"};
    const auto nfields = static_cast<std::uint32_t>(cp.grid.dim + 1);
    w.put(nfields);
    for (int a = 0; a < cp.grid.dim; ++a) put_field(w, names[a], cp.state.u[a]);
    put_field(w, "p", cp.state.p);

    const std::size_t n = cp.markers.size();
    if (n > 0 && cp.force.size() != n) throw ConfigError("checkpoint force array does not match the markers");
    w.put(static_cast<std::uint64_t>(n));
    if (n > 0) {
        w.put(cp.alpha);
        w.put(static_cast<std::uint8_t>(cp.basis == Basis::Linear ? 1 : 0));
        w.put(static_cast<std::int32_t>(cp.markers.dim));
        for (std::size_t l = 0; l < n; ++l) {
            for (double v : cp.markers.position[l]) w.put(v);
            w.put(cp.markers.area[l]);
            for (double v : cp.markers.normal[l]) w.put(v);
            w.put(cp.markers.volume[l]);
            for (double v : cp.force[l]) w.put(v);
        }
    }
    if (!out) throw NumericalError("failed while writing checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    Reader r(ss.str());

    if (r.bytes(8) != std::string(kMagic, 8)) throw ParseError("not a checkpoint file (bad magic)", 0);
    if (const auto v = r.get<std::uint32_t>(); v != kVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(v), 8);

    Checkpoint cp;
    cp.grid.dim = r.get<std::int32_t>();
    for (int a = 0; a < 3; ++a) cp.grid.cells[a] = r.get<std::int32_t>();
    for (int a = 0; a < 3; ++a) cp.grid.spacing[a] = r.get<double>();
    for (int a = 0; a < 3; ++a) cp.grid.origin[a] = r.get<double>();
    for (int a = 0; a < 3; ++a) cp.grid.periodic[a] = r.get<std::uint8_t>() != 0;
    (void)r.get<std::uint8_t>();
    cp.grid.support_ratio = r.get<double>();
    const std::size_t grid_end = r.pos();
    StaggeredGrid grid;
    try {
        grid = StaggeredGrid(cp.grid);
    } catch (const ConfigError& e) {
        throw ParseError(std::string("invalid grid in checkpoint: ") + e.what(), grid_end);
    }
    cp.state = make_flow_state(grid);
    cp.state.time = r.get<double>();
    cp.step = r.get<std::int64_t>();

    const std::size_t nf_at = r.pos();
    const auto nfields = r.get<std::uint32_t>();
    if (nfields != static_cast<std::uint32_t>(cp.grid.dim + 1)) throw ParseError("unexpected field count", nf_at);
    const char* names[] = {"u", "v", "w"};
    for (int a = 0; a < cp.grid.dim; ++a) {
        const std::size_t at = r.pos();
        Field f = get_field(r, names[a]);
        if (f.extent() != cp.state.u[a].extent()) throw ParseError("field extent does not match the grid", at);
        cp.state.u[a] = std::move(f);
    }
    {
        const std::size_t at = r.pos();
        Field f = get_field(r, "p");
        if (f.extent() != cp.state.p.extent()) throw ParseError("field extent does not match the grid", at);
        cp.state.p = std::move(f);
    }

    const auto n = r.get<std::uint64_t>();
    if (n > 0) {
        cp.alpha = r.get<double>();
        cp.basis = r.get<std::uint8_t>() ? Basis::Linear : Basis::Constant;
        cp.markers.dim = r.get<std::int32_t>();
        for (std::uint64_t l = 0; l < n; ++l) {
            Vec3 x, nrm, f;
            for (double& v : x) v = r.get<double>();
            const double area = r.get<double>();
            for (double& v : nrm) v = r.get<double>();
            const double vol = r.get<double>();
            for (double& v : f) v = r.get<double>();
            cp.markers.push(x, area, nrm, 0.0);
            cp.markers.volume.back() = vol;
            cp.force.push_back(f);
        }
    }
    return cp;
}

}  // namespace mlsib
