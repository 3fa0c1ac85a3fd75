// Library usage sample: synthesize a textured image, add noise at a few
// levels and print the score for each, using freshly generated test weights.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "deepwsd/deepwsd.hpp"

int main() {
    using namespace deepwsd;

    const auto path = std::filesystem::temp_directory_path() / "deepwsd_example_weights.bin";
    const WeightArchive weights = gen_test_weights(7, path);

    ImageTensor ref(3, 96, 96);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < 96; ++y)
            for (std::size_t x = 0; x < 96; ++x)
                ref.at(c, y, x) = static_cast<float>(
                    127.5 + 100.0 * std::sin(0.15 * x + 0.5 * c) * std::cos(0.11 * y));

    std::mt19937 rng(1);
    std::normal_distribution<float> noise(0.0f, 1.0f);
    ImageTensor unit_noise(3, 96, 96);
    for (float& v : unit_noise.data())
        v = noise(rng);

    const MetricConfig cfg;
    for (float sigma : {5.0f, 10.0f, 20.0f, 40.0f}) {
        ImageTensor dist = ref;
        for (std::size_t i = 0; i < dist.size(); ++i)
            dist.data()[i] = std::clamp(dist.data()[i] + sigma * unit_noise.data()[i], 0.0f, 255.0f);
        const auto b = score_images(ref, dist, &weights, cfg);
        std::printf("sigma %5.1f  score %.6f  (psnr %.2f dB)\n", sigma, b.score, psnr(ref, dist));
    }
    std::filesystem::remove(path);
}
