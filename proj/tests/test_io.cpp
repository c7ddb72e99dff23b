#include <gtest/gtest.h>

#include <filesystem>

#include "crnr/io.hpp"
#include "crnr/reference.hpp"
#include "support.hpp"

namespace crnr {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir()
{
    const fs::path dir = fs::temp_directory_path() / "crnr_io_tests";
    fs::create_directories(dir);
    return dir;
}

TEST(Io, ClassFixtures)
{
    const CandidateClass z1 = io::load_class(test::fixture("z1.json"));
    ASSERT_EQ(z1.freqs.size(), 10u);
    EXPECT_EQ(z1.freqs[0], cplx(0.4474, 0.5822));
    const CandidateClass z2 = io::load_class(test::fixture("z2.json"));
    EXPECT_EQ(z2.freqs[0], cplx(0.0429, 0.0825));
    EXPECT_EQ(z1.freqs, reference::z1().freqs);
    EXPECT_EQ(z2.freqs, reference::z2().freqs);
    EXPECT_EQ(io::load_class(test::fixture("four_mode.json")).freqs, reference::four_mode().freqs);
}

TEST(Io, SignalRoundTrip)
{
    std::mt19937_64 rng(1);
    const std::vector<Mode> modes{{cplx(0.9, 0.1), {cplx(1.0, 2.0), cplx(0.3)}, 2}};
    const Signal y = add_awgn(synth_mixture(modes, 17, 2), 3.0, 77);
    const fs::path p = temp_dir() / "sig.json";
    io::save_signal(y, p);
    const Signal z = io::load_signal(p);
    EXPECT_LE((z.samples() - y.samples()).cwiseAbs().maxCoeff(), 1e-15);
    ASSERT_TRUE(z.meta());
    EXPECT_EQ(z.meta()->seed, 77u);
    EXPECT_EQ(z.meta()->snr_db, 3.0);
    EXPECT_EQ(z.meta()->modes[0].delay, 2);
    EXPECT_EQ(z.meta()->modes[0].residues[0], cplx(1.0, 2.0));
}

TEST(Io, NoiselessSnrIsInf)
{
    Signal y = synth_unit_mixture(std::vector<cplx>{cplx(0.5)}, 4);
    y = add_awgn(y, kNoiselessSnr, 0);
    const io::json doc = io::to_json(y);
    EXPECT_EQ(doc["meta"]["snr_db"], "inf");
    EXPECT_TRUE(std::isinf(*io::signal_from_json(doc).meta()->snr_db));
}

TEST(Io, ClassRoundTrip)
{
    const fs::path p = temp_dir() / "cls.json";
    io::save_class(reference::z2(), p);
    const CandidateClass c = io::load_class(p);
    EXPECT_EQ(c.name, "Z2");
    EXPECT_EQ(c.freqs, reference::z2().freqs);
}

TEST(Io, SchemaErrors)
{
    auto message = [](const std::string& text) {
        try {
            io::parse_class(text);
        } catch (const SchemaError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(R"({"name": "x", "freqs": []})").find("freqs"), std::string::npos);
    EXPECT_NE(message("{\n\"name\": \"x\",\n\"freqs\": [[1, 2], [3]]\n}").find("line 3"), std::string::npos);
    EXPECT_NE(message(R"({"freqs": [[1, 2]]})").find("name"), std::string::npos);
    EXPECT_NE(message("{\n\"name\": \"x\",\n").find("line"), std::string::npos);
    EXPECT_THROW(io::parse_signal(R"({"T": 2, "K": 1, "samples": [[1, 0]]})"), SchemaError);
    EXPECT_THROW(io::parse_signal(R"({"T": 1, "K": 1, "samples": [["a", 0]]})"), SchemaError);
    EXPECT_THROW(io::load_class("/nonexistent/file.json"), InvalidArgument);
}

TEST(Io, CsvHeaders)
{
    SweepReport r;
    r.snr_grid = {0.0};
    r.trials = 1;
    r.curves.push_back(MethodCurve{Method::crnr, {1}, {1.0}});
    const std::string csv = io::report_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "snr_db,method,error_rate,disk_center_re,disk_center_im,disk_radius,variant");
    GridField g{{0.0, 1.0}, {0.0}, Eigen::MatrixXd::Zero(2, 1)};
    EXPECT_EQ(io::grid_csv(g).substr(0, 12), "re,im,value\n");
    EXPECT_EQ(io::polygon_csv(Polygon{{cplx(1.0)}}).substr(0, 6), "re,im\n");
    EXPECT_EQ(io::singular_values_csv(RVector::Ones(2)).substr(0, 12), "index,sigma\n");
}

} // namespace
} // namespace crnr
