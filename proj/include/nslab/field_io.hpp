#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/trajectory.hpp"

static_assert(std::endian::native == std::endian::little,
              "NSRF writer assumes a little-endian host");

namespace nslab {

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("NSRF: truncated file");
    return v;
}

inline double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("NSRF: truncated file");
    return v;
}

} // namespace detail

/// NSRF snapshot: magic "NSRF", version u32 = 1, dims u32, N u32 per axis,
/// L f64, components u32, then components * N^dims little-endian f64 values
/// in row-major axis order.
inline void save_field_nsrf(const PhysicalField& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("NSRF: cannot open for writing: " + path.string());
    os.write("NSRF", 4);
    detail::write_u32(os, 1);
    const GridSpec& g = f.grid();
    detail::write_u32(os, static_cast<std::uint32_t>(g.dims));
    for (int d = 0; d < g.dims; ++d) detail::write_u32(os, static_cast<std::uint32_t>(g.n));
    detail::write_f64(os, g.box_half_width);
    detail::write_u32(os, static_cast<std::uint32_t>(f.components()));
    for (int c = 0; c < f.components(); ++c) {
        auto span = f.data(c);
        os.write(reinterpret_cast<const char*>(span.data()),
                 static_cast<std::streamsize>(span.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("NSRF: write failed: " + path.string());
}

inline PhysicalField load_field_nsrf(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("NSRF: cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NSRF", 4) != 0)
        throw std::runtime_error("NSRF: bad magic in " + path.string());
    if (detail::read_u32(is) != 1) throw std::runtime_error("NSRF: unsupported version");
    const int dims = static_cast<int>(detail::read_u32(is));
    if (dims != 2 && dims != 3) throw std::runtime_error("NSRF: bad dims");
    int n = 0;
    for (int d = 0; d < dims; ++d) {
        const int nd = static_cast<int>(detail::read_u32(is));
        if (d == 0) n = nd;
        else if (nd != n) throw std::runtime_error("NSRF: anisotropic grids unsupported");
    }
    const double L = detail::read_f64(is);
    const int components = static_cast<int>(detail::read_u32(is));
    auto grid = GridSpec::make(dims, n, L);
    PhysicalField f(grid, components);
    for (int c = 0; c < components; ++c) {
        auto span = f.data(c);
        is.read(reinterpret_cast<char*>(span.data()),
                static_cast<std::streamsize>(span.size() * sizeof(double)));
        if (!is) throw std::runtime_error("NSRF: truncated payload in " + path.string());
    }
    return f;
}

/// Trajectory archive: a directory of NSRF snapshots plus manifest.txt and a
/// per-step stats table.
inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const GridSpec& g = traj.grid();

    std::ofstream man(dir / "manifest.txt");
    if (!man) throw std::runtime_error("trajectory: cannot write manifest");
    man << "format = nslab-trajectory\n";
    man << "version = 1\n";
    man << "dims = " << g.dims << "\n";
    man << "n = " << g.n << "\n";
    man << "box_half_width = " << std::setprecision(17) << g.box_half_width << "\n";
    man << "snapshots = " << traj.size() << "\n";
    man << "has_pressures = " << (traj.has_pressures() ? 1 : 0) << "\n";
    man << "config_hash = " << std::hex << traj.meta().config_hash << std::dec << "\n";
    man << "seed = " << traj.meta().seed << "\n";
    man << "config = " << traj.meta().config_summary << "\n";
    man << "times =";
    for (real t : traj.times()) man << " " << std::setprecision(17) << t;
    man << "\n";

    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::ostringstream name;
        name << "snap_" << std::setw(6) << std::setfill('0') << i << ".nsrf";
        save_field_nsrf(traj.snapshot(i), dir / name.str());
        if (traj.has_pressures()) {
            std::ostringstream pname;
            pname << "pressure_" << std::setw(6) << std::setfill('0') << i << ".nsrf";
            save_field_nsrf(traj.cached_pressure(i), dir / pname.str());
        }
    }

    std::ofstream stats(dir / "step_stats.csv");
    stats << "t,energy,enstrophy,max_abs\n";
    for (const auto& s : traj.step_stats())
        stats << std::setprecision(17) << s.t << "," << s.energy << "," << s.enstrophy << ","
              << s.max_abs << "\n";
}

inline Trajectory load_trajectory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::ifstream man(dir / "manifest.txt");
    if (!man) throw std::runtime_error("trajectory: missing manifest in " + dir.string());

    int dims = 0, n = 0;
    double L = 0.0;
    std::size_t count = 0;
    bool has_pressures = false;
    std::uint64_t config_hash = 0, seed = 0;
    std::string config_summary;
    std::vector<real> times;

    std::string line;
    while (std::getline(man, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
        };
        trim(key);
        trim(val);
        if (key == "dims") dims = std::stoi(val);
        else if (key == "n") n = std::stoi(val);
        else if (key == "box_half_width") L = std::stod(val);
        else if (key == "snapshots") count = std::stoul(val);
        else if (key == "has_pressures") has_pressures = val == "1";
        else if (key == "config_hash") config_hash = std::stoull(val, nullptr, 16);
        else if (key == "seed") seed = std::stoull(val);
        else if (key == "config") config_summary = val;
        else if (key == "times") {
            std::istringstream ss(val);
            real t;
            while (ss >> t) times.push_back(t);
        }
    }
    if (times.size() != count) throw std::runtime_error("trajectory: manifest time count mismatch");

    Trajectory traj(GridSpec::make(dims, n, L));
    traj.meta().config_hash = config_hash;
    traj.meta().seed = seed;
    traj.meta().config_summary = config_summary;

    for (std::size_t i = 0; i < count; ++i) {
        std::ostringstream name;
        name << "snap_" << std::setw(6) << std::setfill('0') << i << ".nsrf";
        traj.add_snapshot(times[i], load_field_nsrf(dir / name.str()));
        if (has_pressures) {
            std::ostringstream pname;
            pname << "pressure_" << std::setw(6) << std::setfill('0') << i << ".nsrf";
            traj.add_pressure(load_field_nsrf(dir / pname.str()));
        }
    }

    std::ifstream stats(dir / "step_stats.csv");
    if (stats) {
        std::getline(stats, line); // header
        while (std::getline(stats, line)) {
            if (line.empty()) continue;
            StepStats s;
            std::istringstream ss(line);
            char comma;
            ss >> s.t >> comma >> s.energy >> comma >> s.enstrophy >> comma >> s.max_abs;
            if (ss) traj.step_stats().push_back(s);
        }
    }
    return traj;
}

} // namespace nslab
