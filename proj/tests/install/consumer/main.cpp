#include <iostream>

#include "emolens/emotion.hpp"
#include "emolens/nn.hpp"

int main() {
  const auto model = emolens::nn::zero_model(emolens::nn::default_dnn_spec(4));
  const auto label = emolens::nn::predict_label(model, emolens::nn::Tensor::row_vector(std::vector<double>(4, 1.0)));
  std::cout << emolens::to_string(label) << "\n";
  return label == emolens::Emotion::kNeutral ? 0 : 1;
}
