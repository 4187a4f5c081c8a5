#include "rotlim/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace rotlim {

namespace {

static_assert(std::endian::native == std::endian::little,
              "SPF1 I/O assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'P', 'F', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw ConfigError("spf read: truncated header in " + path);
    return v;
}

}  // namespace

void write_spf(const std::string& path, const std::vector<SpectralScalar>& components) {
    if (components.empty()) throw ConfigError("spf write: no components");
    const GridSpec& g = components.front().grid;
    for (const SpectralScalar& c : components)
        if (!(c.grid == g)) throw ConfigError("spf write: components on different grids");

    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("spf write: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(g.n));
    write_u32(os, static_cast<std::uint32_t>(components.size()));
    for (const SpectralScalar& c : components)
        os.write(reinterpret_cast<const char*>(c.coeffs.data()),
                 static_cast<std::streamsize>(c.coeffs.size() * sizeof(Complex)));
    if (!os) throw ConfigError("spf write: short write to " + path);
}

std::vector<SpectralScalar> read_spf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("spf read: cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("spf read: bad magic in " + path);
    const std::uint32_t n = read_u32(is, path);
    const std::uint32_t count = read_u32(is, path);
    if (n == 0 || n > 65536) throw ConfigError("spf read: implausible grid size in " + path);
    if (count == 0) throw ConfigError("spf read: no components in " + path);

    const GridSpec g(static_cast<int>(n));
    std::vector<SpectralScalar> out;
    out.reserve(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        SpectralScalar f(g);
        if (!is.read(reinterpret_cast<char*>(f.coeffs.data()),
                     static_cast<std::streamsize>(f.coeffs.size() * sizeof(Complex))))
            throw ConfigError("spf read: truncated payload in " + path);
        out.push_back(std::move(f));
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config read: cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config read: " + path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config read: " + path + ":" + std::to_string(lineno) +
                              ": empty key");
        out[key] = value;
    }
    return out;
}

}  // namespace rotlim
