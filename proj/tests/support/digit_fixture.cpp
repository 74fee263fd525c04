#include "support/digit_fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lupi/dataio.hpp"
#include "lupi/rng.hpp"

namespace fixtures {

namespace {

struct Box {
    int r0, r1, c0, c1; // inclusive
};

// Seven-segment glyphs, strokes 2px, on the canonical 28x28 canvas:
//   A: top bar, G: middle bar, D: bottom bar,
//   F/B: upper-left/right verticals, E/C: lower-left/right verticals.
constexpr std::array<Box, 7> kSegments = {{
    {4, 5, 8, 19},    // A
    {6, 13, 18, 19},  // B
    {16, 23, 18, 19}, // C
    {23, 24, 8, 19},  // D
    {16, 23, 8, 9},   // E
    {6, 13, 8, 9},    // F
    {13, 14, 8, 19},  // G
}};

constexpr std::array<std::uint8_t, 10> kDigitSegments = {
    0b0111111, // 0: ABCDEF
    0b0000110, // 1: BC
    0b1011011, // 2: ABDEG
    0b1001111, // 3: ABCDG
    0b1100110, // 4: BCFG
    0b1101101, // 5: ACDFG
    0b1111101, // 6: ACDEFG
    0b0000111, // 7: ABC
    0b1111111, // 8: all
    0b1101111, // 9: ABCDFG
};

std::array<double, 784> glyph_bitmap(int digit) {
    std::array<double, 784> canvas{};
    for (int s = 0; s < 7; ++s) {
        if (!(kDigitSegments[digit] >> s & 1)) continue;
        const Box& box = kSegments[s];
        for (int r = box.r0; r <= box.r1; ++r)
            for (int c = box.c0; c <= box.c1; ++c) canvas[r * 28 + c] = 1.0;
    }
    return canvas;
}

double bilinear(const std::array<double, 784>& img, double r, double c) {
    if (r < 0.0 || c < 0.0 || r > 27.0 || c > 27.0) return 0.0;
    const int r0 = static_cast<int>(r), c0 = static_cast<int>(c);
    const int r1 = std::min(r0 + 1, 27), c1 = std::min(c0 + 1, 27);
    const double fr = r - r0, fc = c - c0;
    return img[r0 * 28 + c0] * (1 - fr) * (1 - fc) + img[r0 * 28 + c1] * (1 - fr) * fc +
           img[r1 * 28 + c0] * fr * (1 - fc) + img[r1 * 28 + c1] * fr * fc;
}

// Each instance is the class glyph under a random affine map (rotation,
// scale, shear, translation) plus light pixel noise. The continuous
// distortions give real intra-class diversity: full-resolution views stay
// separable while 4x4 pooling blurs thin strokes into overlapping blobs.
void render_set(std::size_t n, lupi::Rng& rng, std::vector<std::uint8_t>& pixels,
                std::vector<std::uint8_t>& labels) {
    constexpr double kNoiseSigma = 0.10;
    std::array<std::array<double, 784>, 10> prototypes;
    for (int d = 0; d < 10; ++d) prototypes[d] = glyph_bitmap(d);

    pixels.assign(n * 784, 0);
    labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int digit = static_cast<int>(rng.index(10));
        labels[i] = static_cast<std::uint8_t>(digit);
        const double angle = (rng.uniform() * 2 - 1) * 0.45;
        const double scale = 0.75 + rng.uniform() * 0.5;
        const double shear = (rng.uniform() * 2 - 1) * 0.25;
        const double dx = (rng.uniform() * 2 - 1) * 2.5;
        const double dy = (rng.uniform() * 2 - 1) * 2.5;
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (int r = 0; r < 28; ++r) {
            for (int c = 0; c < 28; ++c) {
                const double yr = (r - 13.5 - dy) / scale;
                const double xc = (c - 13.5 - dx) / scale;
                const double xr = ca * xc + sa * yr;
                const double yy = -sa * xc + ca * yr;
                const double xs = xr - shear * yy;
                double v = bilinear(prototypes[digit], yy + 13.5, xs + 13.5);
                v = std::clamp(v + kNoiseSigma * rng.normal(), 0.0, 1.0);
                pixels[i * 784 + r * 28 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
}

} // namespace

DigitSetPaths write_digit_idx_files(const std::string& dir, std::size_t n_train,
                                    std::size_t n_test, std::uint64_t seed) {
    lupi::Rng rng(seed);
    std::vector<std::uint8_t> pixels, labels;

    DigitSetPaths paths;
    paths.train_images = dir + "/digits-train-images-idx3-ubyte";
    paths.train_labels = dir + "/digits-train-labels-idx1-ubyte";
    paths.test_images = dir + "/digits-test-images-idx3-ubyte";
    paths.test_labels = dir + "/digits-test-labels-idx1-ubyte";

    render_set(n_train, rng, pixels, labels);
    lupi::write_idx_images(paths.train_images, pixels, n_train, 28, 28);
    lupi::write_idx_labels(paths.train_labels, labels);

    render_set(n_test, rng, pixels, labels);
    lupi::write_idx_images(paths.test_images, pixels, n_test, 28, 28);
    lupi::write_idx_labels(paths.test_labels, labels);
    return paths;
}

} // namespace fixtures
