/**
 * Model loading: built-in architectures by name or a tfjs layers-model
 * checkpoint directory, plus untrained re-initialization of the same
 * architecture per scheme and seed. Feature vectors come from the layer
 * just before the classification head.
 */

import * as tf from '@tensorflow/tfjs'
import { existsSync, mkdirSync, readFileSync, writeFileSync } from 'fs'
import { dirname, join } from 'path'

export type InitScheme = 'xavier_normal' | 'he_normal' | 'he_uniform'

export const INIT_SCHEMES: InitScheme[] = ['xavier_normal', 'he_normal', 'he_uniform']

/** Small convolutional net usable offline; feature layer is resize-agnostic. */
export function buildSmallCnn(seed = 0, init: InitScheme = 'he_normal'): tf.LayersModel {
  const model = tf.sequential()
  model.add(
    tf.layers.conv2d({
      inputShape: [null as unknown as number, null as unknown as number, 3],
      filters: 8,
      kernelSize: 3,
      activation: 'relu',
      padding: 'same',
      kernelInitializer: makeInitializer(init, seed),
      name: 'conv1',
    }),
  )
  model.add(tf.layers.maxPooling2d({ poolSize: 2, name: 'pool1' }))
  model.add(
    tf.layers.conv2d({
      filters: 16,
      kernelSize: 3,
      activation: 'relu',
      padding: 'same',
      kernelInitializer: makeInitializer(init, seed + 1),
      name: 'conv2',
    }),
  )
  model.add(tf.layers.maxPooling2d({ poolSize: 2, name: 'pool2' }))
  model.add(tf.layers.globalAveragePooling2d({ name: 'gap' }))
  model.add(
    tf.layers.dense({
      units: 64,
      activation: 'relu',
      kernelInitializer: makeInitializer(init, seed + 2),
      name: 'features',
    }),
  )
  model.add(
    tf.layers.dense({
      units: 8,
      activation: 'softmax',
      kernelInitializer: makeInitializer(init, seed + 3),
      name: 'classifier',
    }),
  )
  return model
}

export function makeInitializer(scheme: InitScheme, seed: number) {
  // tfjs treats seed 0 as "unseeded" (falsy check), so shift by one
  const safeSeed = seed + 1
  switch (scheme) {
    case 'xavier_normal':
      return tf.initializers.glorotNormal({ seed: safeSeed })
    case 'he_normal':
      return tf.initializers.heNormal({ seed: safeSeed })
    case 'he_uniform':
      return tf.initializers.heUniform({ seed: safeSeed })
  }
}

/** Standard tfjs layers-model layout: model.json + binary weight shards. */
function fileSystemIO(dir: string): tf.io.IOHandler {
  return {
    save: async (artifacts: tf.io.ModelArtifacts) => {
      mkdirSync(dir, { recursive: true })
      const weightData = artifacts.weightData as ArrayBuffer
      writeFileSync(join(dir, 'weights.bin'), Buffer.from(weightData))
      const manifest = [
        { paths: ['weights.bin'], weights: artifacts.weightSpecs ?? [] },
      ]
      const modelJSON = {
        modelTopology: artifacts.modelTopology,
        format: 'layers-model',
        generatedBy: 'kfea-extractor',
        convertedBy: null,
        weightsManifest: manifest,
      }
      writeFileSync(join(dir, 'model.json'), JSON.stringify(modelJSON))
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      }
    },
    load: async (): Promise<tf.io.ModelArtifacts> => {
      const modelJSON = JSON.parse(readFileSync(join(dir, 'model.json'), 'utf-8'))
      const specs: tf.io.WeightsManifestEntry[] = []
      const chunks: Buffer[] = []
      for (const group of modelJSON.weightsManifest ?? []) {
        specs.push(...group.weights)
        for (const p of group.paths) {
          chunks.push(readFileSync(join(dir, p)))
        }
      }
      const weights = Buffer.concat(chunks)
      return {
        modelTopology: modelJSON.modelTopology,
        weightSpecs: specs,
        weightData: weights.buffer.slice(
          weights.byteOffset,
          weights.byteOffset + weights.byteLength,
        ),
      }
    },
  }
}

export async function saveCheckpoint(model: tf.LayersModel, dir: string): Promise<void> {
  await model.save(fileSystemIO(dir))
}

export async function loadModel(identifier: string): Promise<tf.LayersModel> {
  if (identifier === 'smallcnn') {
    return buildSmallCnn()
  }
  if (existsSync(join(identifier, 'model.json'))) {
    return tf.loadLayersModel(fileSystemIO(identifier))
  }
  if (identifier.endsWith('model.json') && existsSync(identifier)) {
    return tf.loadLayersModel(fileSystemIO(dirname(identifier)))
  }
  throw new Error(
    `cannot load model ${identifier}: not a known name ("smallcnn") or a checkpoint directory`,
  )
}

/**
 * Re-draw the architecture's kernels per scheme and seed, biases to zero.
 * This is the untrained twin of the given model: same topology, fresh
 * deterministic weights.
 */
export function reinitialize(model: tf.LayersModel, scheme: InitScheme, seed: number): void {
  let layerIndex = 0
  for (const layer of model.layers) {
    const weights = layer.getWeights()
    if (weights.length === 0) continue
    const replacement = weights.map((w, wi) => {
      const isBias = w.shape.length === 1
      if (isBias) return tf.zeros(w.shape)
      const initializer = makeInitializer(scheme, seed * 1000 + layerIndex * 10 + wi)
      return initializer.apply(w.shape) as tf.Tensor
    })
    layer.setWeights(replacement)
    layerIndex += 1
  }
}

/** Model truncated at the layer before the classification head. */
export function featureModel(model: tf.LayersModel): tf.LayersModel {
  if (model.layers.length < 2) {
    throw new Error('model needs at least two layers to drop the classification head')
  }
  const penultimate = model.layers[model.layers.length - 2]
  return tf.model({ inputs: model.inputs, outputs: penultimate.output })
}
