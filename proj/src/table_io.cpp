/*
   Copyright 2026 The gexp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "gexp/table_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace gexp {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'E', 'X', 'P', 'T', 'B', 'L', '\0'};

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}

    template <class T>
    void put(T x)
    {
        out_.write(reinterpret_cast<const char*>(&x), sizeof(T));
    }

    template <class T>
    void put_vec(const std::vector<T>& v)
    {
        put<std::uint64_t>(v.size());
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    }

    void put_str(const std::string& s)
    {
        put<std::uint64_t>(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}

    template <class T>
    T get()
    {
        T x{};
        in_.read(reinterpret_cast<char*>(&x), sizeof(T));
        check();
        return x;
    }

    template <class T>
    std::vector<T> get_vec()
    {
        const auto size = get<std::uint64_t>();
        if (size > (std::uint64_t{1} << 36)) fail("implausible table size");
        std::vector<T> v(size);
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(size * sizeof(T)));
        check();
        return v;
    }

    std::string get_str()
    {
        const auto v = get_vec<char>();
        return {v.begin(), v.end()};
    }

    [[noreturn]] void fail(const std::string& what) const { throw ValidationError("table '" + path_ + "': " + what); }

private:
    void check() const
    {
        if (!in_) fail("truncated file");
    }

    std::ifstream& in_;
    std::string path_;
};

std::vector<double> flat_squares(const ControlGrid& g)
{
    std::vector<double> out;
    for (const auto& s : g.squares)
        for (int i = 0; i < s.dim(); ++i)
            for (int j = 0; j < s.dim(); ++j) out.push_back(s(i, j));
    return out;
}

std::vector<double> flat_quadrature(const QuadratureRule& q)
{
    std::vector<double> out = q.weights;
    for (const auto& x : q.nodes) out.insert(out.end(), x.data(), x.data() + x.size());
    return out;
}

} // namespace

void write_table(const std::string& path, const RunConfig& config, const ValueAndPolicy& vp)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("table: cannot write '" + path + "'");
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.put<std::uint32_t>(kTableVersion);
    w.put_str(to_json(config).dump());
    w.put<std::uint8_t>(vp.kind == SolverKind::Tree ? 0 : 1);
    w.put<std::int32_t>(vp.steps);
    w.put<double>(vp.value);
    w.put_str(vp.noise_kind);
    w.put_vec(flat_squares(vp.controls));
    w.put_vec(flat_quadrature(vp.quad));

    if (const auto* tp = std::get_if<TreePolicy>(&vp.policy)) {
        w.put<std::int32_t>(tp->control_count);
        w.put<std::int32_t>(tp->branching);
        for (const auto& c : tp->control) w.put_vec(c);
        for (const auto& v : tp->value) w.put_vec(v);
    } else {
        const auto& lp = std::get<LatticePolicy>(vp.policy);
        w.put<std::int32_t>(lp.layout.dim);
        w.put<std::uint8_t>(lp.layout.uses_qv ? 1 : 0);
        w.put<std::int32_t>(static_cast<std::int32_t>(lp.layout.kind));
        w.put<std::int32_t>(lp.lattice.rank());
        for (const auto& a : lp.lattice.axes()) {
            w.put<double>(a.lo);
            w.put<double>(a.hi);
            w.put<std::int32_t>(a.points);
        }
        for (const auto& c : lp.control) w.put_vec(c);
        for (const auto& v : lp.value) w.put_vec(v);
    }
    if (!out) throw ComputationError("table: write to '" + path + "' failed");
}

LoadedTable read_table(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("table: cannot open '" + path + "'");
    Reader r(in, path);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) r.fail("not a policy table");
    if (const auto version = r.get<std::uint32_t>(); version != kTableVersion)
        r.fail("unsupported version " + std::to_string(version));

    LoadedTable t;
    t.config = parse_config(r.get_str());
    const RunConfig& c = t.config;
    const NoiseDistribution nu = build_noise(c.noise);
    ValueAndPolicy& vp = t.vp;
    const auto kind = r.get<std::uint8_t>();
    if (kind > 1) r.fail("unknown solver kind");
    vp.kind = kind == 0 ? SolverKind::Tree : SolverKind::Lattice;
    vp.steps = r.get<std::int32_t>();
    vp.value = r.get<double>();
    vp.noise_kind = r.get_str();
    vp.domain = build_domain(c.domain);
    vp.controls = sqrt_grid(vp.domain, c.solver.control_resolution);
    vp.quad = vp.kind == SolverKind::Tree ? nu.atoms() : quadrature(nu, c.solver.quadrature_order);
    if (vp.noise_kind != nu.kind_name()) r.fail("noise kind does not match the embedded config");
    if (vp.steps != c.solver.n) r.fail("step count does not match the embedded config");
    if (r.get_vec<double>() != flat_squares(vp.controls)) r.fail("control grid does not match the embedded config");
    if (r.get_vec<double>() != flat_quadrature(vp.quad)) r.fail("quadrature does not match the embedded config");

    const auto n = static_cast<std::size_t>(vp.steps);
    if (vp.kind == SolverKind::Tree) {
        TreePolicy tp;
        tp.control_count = r.get<std::int32_t>();
        tp.branching = r.get<std::int32_t>();
        if (tp.control_count != vp.controls.size() || tp.branching != tp.control_count * vp.quad.size())
            r.fail("tree shape does not match the embedded config");
        for (std::size_t k = 0; k < n; ++k) tp.control.push_back(r.get_vec<std::int32_t>());
        for (std::size_t k = 0; k <= n; ++k) tp.value.push_back(r.get_vec<double>());
        std::size_t width = 1;
        for (std::size_t k = 0; k <= n; ++k) {
            if (tp.value[k].size() != width || (k < n && tp.control[k].size() != width))
                r.fail("tree stage " + std::to_string(k) + " has the wrong size");
            width *= static_cast<std::size_t>(tp.branching);
        }
        vp.policy = std::move(tp);
    } else {
        LatticePolicy lp;
        lp.layout.dim = r.get<std::int32_t>();
        lp.layout.uses_qv = r.get<std::uint8_t>() != 0;
        const auto mk = r.get<std::int32_t>();
        if (mk < 0 || mk > static_cast<std::int32_t>(MarkovKind::PathAverage)) r.fail("bad Markov kind");
        lp.layout.kind = static_cast<MarkovKind>(mk);
        const auto rank = r.get<std::int32_t>();
        if (rank != lp.layout.rank() || lp.layout.dim != vp.domain.dim()) r.fail("lattice layout is inconsistent");
        std::vector<LatticeAxis> axes(static_cast<std::size_t>(rank));
        for (auto& a : axes) {
            a.lo = r.get<double>();
            a.hi = r.get<double>();
            a.points = r.get<std::int32_t>();
            if (a.points < 1) r.fail("lattice axis without points");
        }
        lp.lattice = StateLattice(std::move(axes));
        for (std::size_t k = 0; k < n; ++k) lp.control.push_back(r.get_vec<std::int32_t>());
        for (std::size_t k = 0; k <= n; ++k) lp.value.push_back(r.get_vec<double>());
        for (std::size_t k = 0; k <= n; ++k)
            if (lp.value[k].size() != lp.lattice.size() || (k < n && lp.control[k].size() != lp.lattice.size()))
                r.fail("lattice stage " + std::to_string(k) + " has the wrong size");
        vp.policy = std::move(lp);
    }
    vp.diagnostics.control_resolution = c.solver.control_resolution;
    vp.diagnostics.control_count = vp.controls.size();
    vp.diagnostics.quadrature_nodes = vp.quad.size();
    return t;
}

} // namespace gexp
