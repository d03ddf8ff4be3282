#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "roadstereo/costs.hpp"

using namespace roadstereo;

namespace {

GrayImage shifted(const GrayImage& img, int by, std::mt19937_64& rng)
{
    auto out = oracle::random_image(img.width(), img.height(), rng);
    for (int v = 0; v < img.height(); ++v)
        for (int u = 0; u + by < img.width(); ++u)
            out(u, v) = img(u + by, v);
    return out;
}

}  // namespace

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS((NccParams{0, 5}).validate(), ParameterError);
    CHECK_THROWS_AS((NccParams{2, 0}).validate(), ParameterError);
    CHECK_NOTHROW((NccParams{1, 1}).validate());
    CHECK(NccParams{3, 20}.n_pixels() == 49);
}

TEST_CASE("block statistics")
{
    SUBCASE("constant image")
    {
        const auto s = compute_block_stats(GrayImage(9, 7, 7), NccParams{2, 4});
        for (int v = 2; v < 5; ++v)
            for (int u = 2; u < 7; ++u) {
                CHECK(s.mean(u, v) == 7.0);
                CHECK(s.stddev(u, v) == 0.0);
            }
        CHECK(std::isnan(s.mean(0, 0)));
        CHECK(std::isnan(s.stddev(8, 3)));
    }
    SUBCASE("values 1..9")
    {
        GrayImage img(3, 3, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8, 9});
        const auto s = compute_block_stats(img, NccParams{1, 1});
        CHECK(s.mean(1, 1) == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(std::abs(s.stddev(1, 1) - 2.581988897471612) < 1e-12);
    }
    SUBCASE("brute force on random images")
    {
        std::mt19937_64 rng(17);
        for (int rho : {1, 2, 3}) {
            const auto img = oracle::random_image(23, 17, rng);
            const auto s = compute_block_stats(img, NccParams{rho, 1});
            const double n = (2.0 * rho + 1) * (2.0 * rho + 1);
            for (int v = rho; v < img.height() - rho; ++v)
                for (int u = rho; u < img.width() - rho; ++u) {
                    double sum = 0;
                    for (int y = v - rho; y <= v + rho; ++y)
                        for (int x = u - rho; x <= u + rho; ++x)
                            sum += img(x, y);
                    const double mu = sum / n;
                    double var = 0;
                    for (int y = v - rho; y <= v + rho; ++y)
                        for (int x = u - rho; x <= u + rho; ++x)
                            var += (img(x, y) - mu) * (img(x, y) - mu);
                    REQUIRE(std::abs(s.mean(u, v) - mu) < 1e-9);
                    REQUIRE(std::abs(s.stddev(u, v) - std::sqrt(var / n)) < 1e-9);
                    REQUIRE(s.mean(u, v) >= 0.0);
                    REQUIRE(s.mean(u, v) <= 255.0);
                }
        }
    }
    SUBCASE("image smaller than a block")
    {
        CHECK_THROWS_AS(compute_block_stats(GrayImage(4, 10), NccParams{2, 1}), DimensionError);
    }
}

TEST_CASE("cost volume examples")
{
    std::mt19937_64 rng(23);
    const auto left = oracle::random_image(30, 12, rng);
    const NccParams p{2, 5};

    SUBCASE("self-correlation is one at d = 0")
    {
        const auto vols = compute_cost_volumes(left, left, p, nullptr, 1);
        for (int v = 2; v < 10; ++v)
            for (int u = 2; u < 28; ++u)
                CHECK(vols.reference.at(u, v, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("inverted intensities give minus one")
    {
        GrayImage inv = left;
        for (auto& px : inv.pixels())
            px = static_cast<std::uint8_t>(255 - px);
        const auto vols = compute_cost_volumes(left, inv, p, nullptr, 1);
        for (int v = 2; v < 10; ++v)
            for (int u = 2; u < 28; ++u)
                CHECK(vols.reference.at(u, v, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("known shift peaks at the true disparity")
    {
        const auto right = shifted(left, 3, rng);
        const auto vols = compute_cost_volumes(left, right, p, nullptr, 1);
        for (int v = 2; v < 10; ++v)
            for (int u = 5; u < 28; ++u)
                CHECK(vols.reference.at(u, v, 3) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("search range and borders")
    {
        const auto vols = compute_cost_volumes(left, left, p, nullptr, 1);
        CHECK_FALSE(vols.reference.valid(1, 5, 0));
        CHECK_FALSE(vols.reference.valid(4, 5, 3));  // right block would leave the image
        CHECK(vols.reference.valid(5, 5, 3));
        CHECK_FALSE(vols.reference.valid(10, 0, 0));
    }
    SUBCASE("textureless blocks are invalid")
    {
        GrayImage flat = left;
        for (int v = 0; v < 12; ++v)
            for (int u = 10; u < 20; ++u)
                flat(u, v) = 90;
        const auto vols = compute_cost_volumes(flat, flat, p, nullptr, 1);
        CHECK_FALSE(vols.reference.valid(15, 5, 0));
        CHECK(vols.reference.valid(5, 5, 0));
    }
    SUBCASE("masked target blocks are invalid")
    {
        Mask valid(30, 12, 255);
        valid(20, 6) = 0;
        const auto vols = compute_cost_volumes(left, left, p, &valid, 1);
        CHECK_FALSE(vols.reference.valid(20, 6, 0));
        CHECK_FALSE(vols.reference.valid(24, 6, 2));  // right block centred at 22 touches column 20
        CHECK(vols.reference.valid(25, 6, 2));
    }
    SUBCASE("size mismatch")
    {
        CHECK_THROWS_AS(compute_cost_volumes(left, GrayImage(29, 12), p), DimensionError);
    }
}

TEST_CASE("cost volume matches the brute-force correlation")
{
    std::mt19937_64 rng(31);
    const auto left = oracle::random_image(21, 11, rng);
    const auto right = oracle::random_image(21, 11, rng);
    const NccParams p{2, 4};
    const auto vols = compute_cost_volumes(left, right, p, nullptr, 1);
    int checked = 0;
    for (int d = 0; d <= 4; ++d)
        for (int v = 0; v < 11; ++v)
            for (int u = 0; u < 21; ++u) {
                const double expect = oracle::ncc(left, right, u, v, d, 2);
                REQUIRE(std::isnan(expect) == !vols.reference.valid(u, v, d));
                if (!std::isnan(expect)) {
                    REQUIRE(std::abs(vols.reference.at(u, v, d) - expect) < 1e-9);
                    ++checked;
                }
            }
    CHECK(checked > 0);
}

TEST_CASE("cost volume invariants")
{
    std::mt19937_64 rng(99);
    const NccParams p{3, 8};
    const auto left = oracle::random_image(40, 20, rng, 0, 120);
    auto right = shifted(left, 2, rng);
    for (auto& px : right.pixels())
        px = static_cast<std::uint8_t>(px % 121);
    const auto vols = compute_cost_volumes(left, right, p, nullptr, 1);

    SUBCASE("range")
    {
        for (double c : vols.reference.values())
            if (!std::isnan(c)) {
                REQUIRE(c >= -1.0 - 1e-9);
                REQUIRE(c <= 1.0 + 1e-9);
            }
    }
    SUBCASE("photometric invariance")
    {
        GrayImage scaled = right;
        for (auto& px : scaled.pixels())
            px = static_cast<std::uint8_t>(2 * px + 10);
        const auto vols2 = compute_cost_volumes(left, scaled, p, nullptr, 1);
        for (std::size_t i = 0; i < vols.reference.values().size(); ++i) {
            const double a = vols.reference.values()[i];
            const double b = vols2.reference.values()[i];
            REQUIRE(std::isnan(a) == std::isnan(b));
            if (!std::isnan(a))
                REQUIRE(std::abs(a - b) < 1e-6);
        }
    }
    SUBCASE("dual storage")
    {
        int valid = 0;
        for (int d = 0; d <= p.d_max; ++d)
            for (int v = 0; v < 20; ++v)
                for (int u = 0; u < 40; ++u) {
                    if (!vols.reference.valid(u, v, d))
                        continue;
                    REQUIRE(u - d >= 0);
                    REQUIRE(vols.reference.at(u, v, d) == vols.target.at(u - d, v, d));
                    ++valid;
                }
        int tar_valid = 0;
        for (double c : vols.target.values())
            tar_valid += !std::isnan(c);
        CHECK(valid == tar_valid);
    }
    SUBCASE("thread count does not change the result")
    {
        for (unsigned t : {2u, 3u, 8u}) {
            const auto other = compute_cost_volumes(left, right, p, nullptr, t);
            CHECK(std::memcmp(other.reference.values().data(), vols.reference.values().data(),
                              vols.reference.values().size_bytes()) == 0);
            CHECK(std::memcmp(other.target.values().data(), vols.target.values().data(),
                              vols.target.values().size_bytes()) == 0);
        }
    }
}
