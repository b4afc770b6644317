#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "zkmfa/corpus.hpp"
#include "zkmfa/errors.hpp"
#include "zkmfa/protocol.hpp"
#include "zkmfa/stats.hpp"

namespace py = pybind11;
using namespace zkmfa;

namespace {

py::bytes to_py(ByteView b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes from_py(const py::bytes& b) {
    const std::string s = b;
    return Bytes(s.begin(), s.end());
}

Nonce512 nonce(const py::bytes& b) {
    return Nonce512::from_bytes(from_py(b));
}

}  // namespace

PYBIND11_MODULE(_zkmfa, m) {
    m.doc() = "Fused SRAM-PUF and facial-landmark ephemeral key generation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameters>(m, "InvalidParameters", base.ptr());
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<NotFound>(m, "NotFound", base.ptr());
    py::register_exception<ProtocolStateError>(m, "ProtocolStateError", base.ptr());
    py::register_exception<InsufficientStableBits>(m, "InsufficientStableBits", base.ptr());

    m.def("sha3_256", [](const py::bytes& b) { return to_py(sha3_256(from_py(b))); });
    m.def("sha3_512", [](const py::bytes& b) { return to_py(sha3_512(from_py(b))); });
    m.def(
        "shake256",
        [](const py::bytes& b, std::size_t n) {
            Shake256 s;
            s.absorb(from_py(b));
            Bytes out(n);
            s.squeeze(out);
            return to_py(out);
        },
        py::arg("data"), py::arg("length"));

    m.def(
        "derive_cell_indices",
        [](const py::bytes& rn1, const std::string& pwd, std::uint32_t cells, std::uint32_t table) {
            return derive_cell_indices(nonce(rn1), Password(pwd), cells, table);
        },
        py::arg("rn1"), py::arg("password"), py::arg("cell_count") = kPufCells,
        py::arg("table_size") = kTableCells);
    m.def(
        "challenge_indices",
        [](const py::bytes& rn2, const std::string& pwd, std::size_t count) {
            ChallengeIndexStream s = derive_challenge_index_stream(nonce(rn2), Password(pwd));
            std::vector<std::uint32_t> out(count);
            for (auto& v : out) v = s.next();
            return out;
        },
        py::arg("rn2"), py::arg("password"), py::arg("count"));
    m.def(
        "select_landmark_indices",
        [](const std::string& pwd) { return select_landmark_indices(Password(pwd)); }, py::arg("password"));

    m.def(
        "quantize_distance",
        [](double d, int g, int mm) { return quantize_distance(d, QuantParams{g, mm, kFrameSize}); },
        py::arg("d"), py::arg("g"), py::arg("m"));

    // Tables cross the boundary as lists of 0/1/2 (2 = X) or as TT01 bytes.
    m.def(
        "table_serialize",
        [](std::uint32_t rows, std::uint32_t cols, const std::vector<std::uint8_t>& cells) {
            std::vector<Trit> t;
            t.reserve(cells.size());
            for (auto c : cells) {
                if (c > 2) throw InvalidInput("cell values are 0, 1 or 2 (X)");
                t.push_back(static_cast<Trit>(c));
            }
            return to_py(serialize(TernaryTable(rows, cols, std::move(t))));
        },
        py::arg("rows"), py::arg("cols"), py::arg("cells"));
    m.def("table_deserialize", [](const py::bytes& b) {
        const TernaryTable t = deserialize(from_py(b));
        std::vector<std::uint8_t> cells;
        cells.reserve(t.size());
        for (auto c : t.cells()) cells.push_back(static_cast<std::uint8_t>(c));
        return py::make_tuple(t.rows(), t.cols(), cells);
    });

    m.def(
        "loopback",
        [](std::uint64_t seed, const std::string& pwd, int g, int mm, int frag_level, std::size_t inject_flips,
           double flaky_fraction, std::uint32_t enroll_cycles) {
            DeviceNoise noise;
            noise.flaky_fraction = flaky_fraction;
            const SramDeviceModel dev = synth_harness_device(seed, 0, noise);
            std::vector<SramRead> reads;
            for (std::uint32_t k = 0; k < enroll_cycles; ++k) reads.push_back(harness_enroll_read(dev, seed, k));
            SweepConfig sc;
            sc.persons = 1;
            sc.enroll_frames = 3;
            sc.probe_frames = 1;
            sc.seed = seed;
            sc.moment_sigma = 0.0;
            const Population pop = synth_population(sc);
            SessionParams sp{g, mm, 384, 256, static_cast<std::uint8_t>(frag_level), kDefaultMaxHamming};
            const Password password(pwd);
            ServerSession server =
                server_enroll(reads, pop.enroll[0], password, seed_nonce(seed, "zkmfa/py/rn1"), sp);
            const LoopbackResult r = run_loopback(server, seed_nonce(seed, "zkmfa/py/rn2"), reads.front(),
                                                  pop.probes[0][0], password, inject_flips);
            py::dict out;
            out["accepted"] = r.accepted;
            out["corrected_bits"] = r.corrected_bits;
            out["key_errors"] = hamming_distance(r.server_key, r.client_key);
            out["fingerprint"] = r.final_key ? to_hex(key_fingerprint(*r.final_key)) : std::string();
            return out;
        },
        py::arg("seed") = 1, py::arg("password") = "zkmfa-shared-password", py::arg("g") = 7, py::arg("m") = 1,
        py::arg("frag_level") = 1, py::arg("inject_flips") = 0, py::arg("flaky_fraction") = 0.0,
        py::arg("enroll_cycles") = 1);

    py::class_<BiasResult>(m, "BiasResult")
        .def_readonly("n", &BiasResult::n)
        .def_readonly("ones", &BiasResult::ones)
        .def_readonly("p_hat", &BiasResult::p_hat)
        .def_readonly("ci_low", &BiasResult::ci_low)
        .def_readonly("ci_high", &BiasResult::ci_high)
        .def_readonly("p_value", &BiasResult::p_value);
    m.def("binomial_test", &binomial_test, py::arg("n"), py::arg("ones"));

    m.def(
        "sweep_csv",
        [](std::uint32_t persons, std::uint32_t probe_frames, std::uint64_t seed,
           const std::vector<std::tuple<int, int, int>>& grid, unsigned workers) {
            SweepConfig cfg;
            cfg.persons = persons;
            cfg.probe_frames = probe_frames;
            cfg.impostor_probes = std::min<std::uint32_t>(cfg.impostor_probes, probe_frames);
            cfg.seed = seed;
            cfg.workers = workers;
            cfg.grid.clear();
            for (const auto& [g, mm, f] : grid) cfg.grid.push_back({g, mm, f});
            py::gil_scoped_release release;
            return sweep_csv(far_frr_sweep(cfg).rows);
        },
        py::arg("persons") = 4, py::arg("probe_frames") = 2, py::arg("seed") = 1,
        py::arg("grid") = std::vector<std::tuple<int, int, int>>{{7, 2, 4}}, py::arg("workers") = 1);

    m.def("verify_golden", [](const std::filesystem::path& root) {
        const GoldenReport r = verify_golden(root);
        std::vector<std::pair<std::string, std::string>> mism;
        for (const auto& x : r.mismatches) mism.emplace_back(x.path, x.summary);
        return py::make_tuple(r.checked, mism);
    });
}
