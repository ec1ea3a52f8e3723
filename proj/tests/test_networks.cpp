#include <gtest/gtest.h>

#include <random>

#include <torch/torch.h>

#include "dsod/grad_check.hpp"
#include "dsod/hrrn.hpp"
#include "dsod/losses.hpp"
#include "dsod/lrscn.hpp"
#include "dsod/spectral_norm.hpp"
#include "dsod/tensor_io.hpp"
#include "dsod/trimap.hpp"

using namespace dsod;

namespace {

void zero_all(torch::nn::Module& m) {
  torch::NoGradGuard guard;
  for (auto& p : m.parameters()) p.zero_();
}

double top_singular_value(const torch::Tensor& matrix) {
  return torch::linalg_svdvals(matrix.to(torch::kFloat64)).max().item<double>();
}

LrscnConfig small_lrscn(int input = 64) {
  LrscnConfig cfg;
  cfg.backbone.stage_channels = {8, 8, 8, 8};
  cfg.backbone.stem_channels = 4;
  cfg.backbone.input_size = input;
  cfg.decoder_channels = 8;
  return cfg;
}

HrrnConfig small_hrrn() {
  HrrnConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.input_shortcut_channels = 4;
  cfg.final_channels = 4;
  return cfg;
}

}  // namespace

TEST(SpectralNorm, Examples) {
  auto eye = torch::eye(4, torch::kFloat64);
  SpectralState state = make_spectral_state(eye, 5);
  EXPECT_TRUE(torch::allclose(spectral_normalize(eye, state), eye, 0, 1e-12));
  EXPECT_NEAR(state.u.norm().item<double>(), 1.0, 1e-12);

  const auto two = 2 * torch::eye(4, torch::kFloat64);
  SpectralState s2 = make_spectral_state(two, 5);
  EXPECT_TRUE(torch::allclose(spectral_normalize(two, s2), eye, 0, 1e-12));

  torch::manual_seed(7);
  const auto w = torch::randn({8, 16}, torch::kFloat64);
  SpectralState s3 = make_spectral_state(w, 50);
  EXPECT_NEAR(top_singular_value(spectral_normalize(w, s3)), 1.0, 1e-4);

  const auto zero = torch::zeros({3, 3}, torch::kFloat64);
  SpectralState s4 = make_spectral_state(zero, 1);
  const auto out = spectral_normalize(zero, s4);
  EXPECT_TRUE(torch::isfinite(out).all().item<bool>());
  EXPECT_EQ(out.abs().sum().item<double>(), 0.0);
}

TEST(SpectralNorm, ConvLayerAgainstSvd) {
  torch::manual_seed(8);
  SNConv2d conv(6, 10, 3);
  conv->power_iterate(50);
  EXPECT_NEAR(top_singular_value(weight_matrix(conv->normalized_weight().detach())), 1.0, 1e-3);
  // Inference does not touch the estimate. Restart from a fresh vector so a
  // training step has something left to refine.
  {
    torch::NoGradGuard no_grad;
    conv->u.copy_(make_spectral_state(conv->weight).u);
  }
  conv->eval();
  const auto u = conv->u.clone();
  conv->forward(torch::randn({1, 6, 8, 8}));
  EXPECT_TRUE(torch::equal(u, conv->u));
  conv->train();
  conv->forward(torch::randn({1, 6, 8, 8}));
  EXPECT_FALSE(torch::equal(u, conv->u));
}

TEST(Backbone, ShapesAndZeroWeights) {
  Backbone net(BackboneConfig{});
  net->eval();
  const auto f = net->forward(torch::rand({1, 3, 128, 128}));
  const std::vector<std::vector<std::int64_t>> expected{{1, 32, 32, 32}, {1, 64, 16, 16}, {1, 128, 8, 8}, {1, 128, 4, 4}};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(f[i].sizes().vec(), expected[i]);
  const auto big = net->forward(torch::rand({1, 3, 256, 256}));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(big[i].size(2), 2 * f[i].size(2));
    EXPECT_EQ(big[i].size(3), 2 * f[i].size(3));
  }
  EXPECT_THROW(net->forward(torch::rand({1, 3, 100, 128})), std::invalid_argument);
  zero_all(*net);
  for (const auto& t : net->forward(torch::rand({1, 3, 64, 64}))) EXPECT_EQ(t.abs().max().item<float>(), 0.0F);
}

TEST(Mecf, ShapeAndZeroWeights) {
  Mecf m(16, 32, std::vector<int>{7, 11});
  m->eval();
  const auto fl = torch::randn({2, 16, 16, 16});
  const auto fh = torch::randn({2, 32, 4, 4});
  EXPECT_EQ(m->forward(fl, fh).sizes(), fl.sizes());
  Mecf top(32, 32, std::vector<int>{7});
  top->eval();
  EXPECT_EQ(top->forward(fh, fh).sizes(), fh.sizes());
  zero_all(*m);
  EXPECT_EQ(m->forward(fl, fh).abs().max().item<float>(), 0.0F);
  EXPECT_THROW(Mecf(15, 32, std::vector<int>{7}), std::invalid_argument);
}

TEST(Decoder, ShapesAndZeroHeads) {
  Decoder d(std::array<int, 4>{8, 8, 8, 8}, 8);
  d->eval();
  std::array<torch::Tensor, 4> in{torch::randn({1, 8, 16, 16}), torch::randn({1, 8, 8, 8}), torch::randn({1, 8, 4, 4}),
                                  torch::randn({1, 8, 2, 2})};
  const auto out = d->forward(in);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out[i].size(2), in[i].size(2));
    EXPECT_EQ(out[i].size(3), in[i].size(3));
  }
  zero_all(*d);
  const auto zero_out = d->forward(in);
  for (int i = 1; i < 4; ++i) {
    const auto s = torch::sigmoid(d->heads[i - 1]->forward(zero_out[i]));
    EXPECT_TRUE(torch::allclose(s, torch::full_like(s, 0.5)));
  }
  std::array<torch::Tensor, 4> bad{in[0], in[0], in[2], in[3]};
  EXPECT_THROW(d->forward(bad), std::invalid_argument);
}

TEST(Sga, ZeroWeightsAndShapes) {
  Sga sga(8);
  const auto d3 = torch::randn({1, 8, 6, 5});
  const SgaOutput out = sga->forward(d3);
  EXPECT_EQ(out.trimap_logits.sizes().vec(), (std::vector<std::int64_t>{1, 3, 6, 5}));
  EXPECT_TRUE((out.saliency > 0).all().item<bool>());
  EXPECT_TRUE((out.saliency < 1).all().item<bool>());
  zero_all(*sga);
  const SgaOutput z = sga->forward(d3);
  EXPECT_TRUE(torch::allclose(z.saliency, torch::full_like(z.saliency, 0.5)));
  EXPECT_TRUE(torch::allclose(z.refined, 1.5 * d3));
  EXPECT_EQ(z.trimap_logits.abs().max().item<float>(), 0.0F);
}

TEST(LrscnNet, ShapesDeterminismAndTrimap) {
  torch::manual_seed(9);
  Lrscn net(LrscnConfig{});
  net->eval();
  const auto x = torch::rand({1, 3, 128, 128});
  const LrscnOutput a = net->forward(x);
  const LrscnOutput b = net->forward(x);
  EXPECT_EQ(a.trimap_logits.sizes().vec(), (std::vector<std::int64_t>{1, 3, 32, 32}));
  EXPECT_TRUE(torch::equal(a.trimap_logits, b.trimap_logits));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.saliency_levels[i].size(2), 32 >> i);
    EXPECT_TRUE(torch::equal(a.saliency_levels[i], b.saliency_levels[i]));
    EXPECT_TRUE((a.saliency_levels[i] >= 0).all().item<bool>());
    EXPECT_TRUE((a.saliency_levels[i] <= 1).all().item<bool>());
  }
  EXPECT_EQ(a.saliency_levels[0].sizes().vec(), (std::vector<std::int64_t>{1, 1, 32, 32}));
  EXPECT_EQ(a.refined_saliency.size(2), 32);
  const Trimap t = predict_trimap(a, 32, 32);
  for (auto v : t.storage()) EXPECT_LE(v, 2);
}

TEST(LrscnNet, RandomConfigsKeepShapeContracts) {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    LrscnConfig cfg;
    for (auto& c : cfg.backbone.stage_channels) c = 2 * (1 + static_cast<int>(rng() % 4));
    cfg.backbone.stem_channels = 2 + static_cast<int>(rng() % 4);
    cfg.decoder_channels = 4 + static_cast<int>(rng() % 6);
    const int first = trial % 2 ? 2 : 4;
    cfg.backbone.stage_strides = {first, first * 2, first * 4, first * 8};
    cfg.backbone.input_size = first * 8 * (1 + static_cast<int>(rng() % 3));
    Lrscn net(cfg);
    net->eval();
    const int n = cfg.backbone.input_size;
    const LrscnOutput out = net->forward(torch::rand({1, 3, n, n}));
    EXPECT_EQ(out.trimap_logits.size(2), n / first);
    EXPECT_EQ(out.saliency_levels[0].size(2), out.trimap_logits.size(2));
    EXPECT_EQ(out.saliency_levels[3].size(2), n / (first * 8));
  }
}

TEST(PredictTrimap, Examples) {
  auto favour2 = torch::zeros({3, 4, 4});
  favour2[2].fill_(1.0);
  EXPECT_EQ(predict_trimap(favour2, 8, 8), Trimap(8, 8, kSalient));
  EXPECT_EQ(predict_trimap(torch::zeros({1, 3, 4, 4}), 4, 4), Trimap(4, 4, kUncertain));
  auto tie02 = torch::zeros({3, 1, 1});
  tie02[0].fill_(1.0);
  tie02[2].fill_(1.0);
  EXPECT_EQ(predict_trimap(tie02, 1, 1).at(0, 0), kBackground);
  EXPECT_THROW(predict_trimap(favour2, 2, 2), std::invalid_argument);

  torch::manual_seed(11);
  const auto logits = torch::randn({3, 32, 32});
  const TrimapCounts small = count_labels(predict_trimap(logits, 32, 32));
  const TrimapCounts big = count_labels(predict_trimap(logits, 128, 128));
  EXPECT_EQ(big.background, 16 * small.background);
  EXPECT_EQ(big.uncertain, 16 * small.uncertain);
  EXPECT_EQ(big.salient, 16 * small.salient);
}

TEST(LrscnNet, GradientMatchesFiniteDifferences) {
  torch::manual_seed(12);
  Lrscn net(small_lrscn(64));
  net->to(torch::kFloat64);
  net->eval();
  // Channels that are exactly zero after a dead ReLU would otherwise sit on
  // the next ReLU's kink, where central differences see a one-sided slope.
  {
    torch::NoGradGuard no_grad;
    for (auto& b : net->named_buffers()) {
      if (b.key().ends_with("running_mean")) b.value().normal_(0.0, 0.1);
    }
  }
  const auto x = torch::rand({1, 3, 64, 64}, torch::kFloat64);
  const auto g = (torch::rand({1, 1, 64, 64}, torch::kFloat64) > 0.5).to(torch::kFloat64);
  const auto t = torch::randint(0, 3, {1, 16, 16}, torch::kInt64);
  auto loss = [&] {
    const LrscnOutput out = net->forward(x);
    std::vector<torch::Tensor> levels;
    for (const auto& l : out.saliency_levels) levels.push_back(upsample_to(l, 64, 64));
    return lrscn_loss(levels, g, out.trimap_logits, t).value;
  };
  GradCheckOptions opts;
  opts.epsilon = 1e-5;
  opts.sample_fraction = 0.01;
  opts.seed = 3;
  const GradCheckResult r = grad_check(loss, net->parameters(), opts);
  EXPECT_GT(r.elements_checked, 0);
  // Looser than the loss checks: thousands of ReLUs sit within eps of a kink.
  EXPECT_LE(r.max_relative_error, 1e-2);
}

TEST(HrrnNet, ResolutionDeterminismAndZeroHeads) {
  torch::manual_seed(13);
  Hrrn net(HrrnConfig{});
  net->eval();
  const auto x = torch::rand({1, 6, 128, 128});
  const HrrnOutput a = net->forward(x);
  const HrrnOutput b = net->forward(x);
  EXPECT_EQ(a.saliency.sizes().vec(), (std::vector<std::int64_t>{1, 1, 128, 128}));
  EXPECT_EQ(a.logvar.sizes(), a.saliency.sizes());
  EXPECT_TRUE(torch::equal(a.saliency, b.saliency));
  EXPECT_TRUE(torch::equal(a.logvar, b.logvar));
  EXPECT_THROW(net->forward(torch::rand({1, 6, 120, 128})), std::invalid_argument);

  Hrrn small(small_hrrn());
  small->eval();
  for (int size : {4, 8, 20, 36}) {
    const HrrnOutput o = small->forward(torch::rand({1, 6, size, size + 4}));
    EXPECT_EQ(o.saliency.size(2), size);
    EXPECT_EQ(o.saliency.size(3), size + 4);
  }
  {
    torch::NoGradGuard guard;
    small->saliency_head->weight.zero_();
    small->saliency_head->bias.zero_();
    small->logvar_head->weight.zero_();
    small->logvar_head->bias.zero_();
  }
  const HrrnOutput z = small->forward(torch::rand({1, 6, 16, 16}));
  EXPECT_TRUE(torch::allclose(z.saliency, torch::full_like(z.saliency, 0.5)));
  EXPECT_EQ(z.logvar.abs().max().item<float>(), 0.0F);
}

TEST(HrrnNet, SpectralNormOfEveryLayer) {
  torch::manual_seed(14);
  Hrrn net(HrrnConfig{});
  auto layers = net->sn_layers();
  EXPECT_GT(layers.size(), 10U);
  for (auto& layer : layers) {
    layer->power_iterate(50);
    EXPECT_NEAR(top_singular_value(weight_matrix(layer->normalized_weight().detach())), 1.0, 1e-3);
  }
}

TEST(HrrnNet, RefineWrapper) {
  torch::manual_seed(15);
  Hrrn net(small_hrrn());
  const Image img(16, 16, 0.3F);
  Trimap t(16, 16, kUncertain);
  t.at(0, 0) = kSalient;
  t.at(0, 1) = kBackground;
  const Refinement r = refine(net, img, t);
  EXPECT_EQ(r.saliency.height(), 16);
  EXPECT_EQ(r.logvar.width(), 16);
  EXPECT_TRUE(net->is_training());
  EXPECT_THROW(refine(net, img, Trimap(8, 16)), std::invalid_argument);
  SaliencyMap s(16, 16, 0.4F);
  overwrite_definite(s, t);
  EXPECT_EQ(s.at(0, 0), 1.0F);
  EXPECT_EQ(s.at(0, 1), 0.0F);
  EXPECT_EQ(s.at(5, 5), 0.4F);
  const auto in = hrrn_input(img, t);
  EXPECT_EQ(in.sizes().vec(), (std::vector<std::int64_t>{1, 6, 16, 16}));
  EXPECT_EQ(in[0][3].sum().item<float>(), 1.0F);
  EXPECT_EQ(in[0][4].sum().item<float>(), 254.0F);
  EXPECT_EQ(in[0][5].sum().item<float>(), 1.0F);
}

TEST(HrrnNet, GradientMatchesFiniteDifferences) {
  torch::manual_seed(16);
  Hrrn net(small_hrrn());
  net->to(torch::kFloat64);
  net->train();
  net->freeze_spectral_state(true);
  const auto x = torch::rand({1, 6, 16, 16}, torch::kFloat64);
  const auto g = (torch::rand({1, 1, 16, 16}, torch::kFloat64) > 0.5).to(torch::kFloat64);
  const auto t = torch::randint(0, 3, {1, 16, 16}, torch::kInt64);
  auto loss = [&] {
    const HrrnOutput out = net->forward(x);
    return hrrn_loss(out.saliency, g, out.logvar, t).value;
  };
  GradCheckOptions opts;
  opts.epsilon = 1e-5;
  opts.sample_fraction = 0.05;
  opts.seed = 4;
  const GradCheckResult r = grad_check(loss, net->parameters(), opts);
  EXPECT_GT(r.elements_checked, 0);
  EXPECT_LE(r.max_relative_error, 1e-3);
}

TEST(TensorIo, RoundTrips) {
  Trimap t(3, 4);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<std::uint8_t>(i % 3);
  EXPECT_EQ(trimap_from_tensor(to_tensor(t)), t);
  EXPECT_EQ(one_hot(t).sum(0).min().item<float>(), 1.0F);
  const Image img(8, 9, 0.25F);
  EXPECT_EQ(image_from_tensor(to_tensor(img)), img);
  SaliencyMap s(5, 6, 0.75F);
  EXPECT_EQ(saliency_from_tensor(to_tensor(s)), s);
}
