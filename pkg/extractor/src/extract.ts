/**
 * Extraction jobs: run an image folder through a model's feature layer
 * and write KFEA files the scoring toolkit consumes directly.
 *
 * Preprocessing is deterministic: plain bilinear resize to the target
 * size (default 224x224), pixel values scaled to [0, 1], no augmentation,
 * no mean/std normalization. The constants are recorded in a sidecar
 * metadata file next to every output.
 */

import * as tf from '@tensorflow/tfjs'
import { writeFileSync } from 'fs'
import { loadImageFolder, type ImageFolder } from './images.js'
import { writeFeatures } from './kfea.js'
import {
  featureModel,
  loadModel,
  reinitialize,
  type InitScheme,
} from './models.js'

export interface ExtractionJob {
  /** built-in name ("smallcnn") or checkpoint directory */
  model: string
  imagesDir: string
  outPath: string
  resize: [number, number]
  untrained: boolean
  init: InitScheme
  /** seed values for the untrained variant (one forward pass each) */
  seeds: number[]
  batchSize: number
}

export const DEFAULT_JOB: Omit<ExtractionJob, 'model' | 'imagesDir' | 'outPath'> = {
  resize: [224, 224],
  untrained: false,
  init: 'he_normal',
  seeds: [0, 1, 2, 3, 4],
  batchSize: 16,
}

export interface ExtractionResult {
  paths: string[]
  n: number
  d: number
  classes: string[]
  skipped: { path: string; reason: string }[]
}

function batches(folder: ImageFolder, job: ExtractionJob): tf.Tensor4D[] {
  const [h, w] = job.resize
  const out: tf.Tensor4D[] = []
  for (let start = 0; start < folder.images.length; start += job.batchSize) {
    const chunk = folder.images.slice(start, start + job.batchSize)
    const resized = chunk.map(img =>
      tf.tidy(() => {
        const t = tf.tensor3d(img.pixels, [img.height, img.width, 3])
        return tf.image.resizeBilinear(t, [h, w])
      }),
    )
    out.push(tf.stack(resized) as tf.Tensor4D)
    resized.forEach(t => t.dispose())
  }
  return out
}

async function forwardAll(model: tf.LayersModel, inputs: tf.Tensor4D[]): Promise<Float32Array> {
  const rows: Float32Array[] = []
  let d = -1
  for (const batch of inputs) {
    const out = model.predict(batch) as tf.Tensor
    const flat = (await out.data()) as Float32Array
    d = out.shape[out.shape.length - 1] as number
    rows.push(new Float32Array(flat))
    out.dispose()
  }
  const n = rows.reduce((acc, r) => acc + r.length / d, 0)
  const all = new Float32Array(n * d)
  let off = 0
  for (const r of rows) {
    all.set(r, off)
    off += r.length
  }
  return all
}

function sidecar(job: ExtractionJob, folder: ImageFolder, extra: object): string {
  return JSON.stringify(
    {
      model: job.model,
      images_dir: job.imagesDir,
      resize: job.resize,
      preprocessing: 'bilinear resize, pixels scaled to [0,1], no normalization constants',
      classes: folder.classes,
      label_order: 'lexicographic class-folder order',
      skipped: folder.skipped,
      ...extra,
    },
    null,
    2,
  )
}

export async function extractPretrained(job: ExtractionJob): Promise<ExtractionResult> {
  const folder = loadImageFolder(job.imagesDir)
  const model = featureModel(await loadModel(job.model))
  const inputs = batches(folder, job)
  const data = await forwardAll(model, inputs)
  inputs.forEach(t => t.dispose())
  const n = folder.images.length
  const d = data.length / n
  const labels = new Uint32Array(folder.images.map(img => img.label))
  writeFeatures(job.outPath, { data, n, d, labels })
  writeFileSync(job.outPath + '.meta.json', sidecar(job, folder, { mode: 'pretrained' }))
  return { paths: [job.outPath], n, d, classes: folder.classes, skipped: folder.skipped }
}

function seedPath(outPath: string, seed: number): string {
  const dot = outPath.lastIndexOf('.')
  if (dot <= 0) return `${outPath}.seed${seed}`
  return `${outPath.slice(0, dot)}.seed${seed}${outPath.slice(dot)}`
}

export async function extractUntrained(job: ExtractionJob): Promise<ExtractionResult> {
  const folder = loadImageFolder(job.imagesDir)
  const base = await loadModel(job.model)
  const inputs = batches(folder, job)
  const n = folder.images.length
  const labels = new Uint32Array(folder.images.map(img => img.label))

  const paths: string[] = []
  let mean: Float64Array | null = null
  let d = -1
  for (const seed of job.seeds) {
    reinitialize(base, job.init, seed)
    const features = featureModel(base)
    const data = await forwardAll(features, inputs)
    d = data.length / n
    const path = seedPath(job.outPath, seed)
    writeFeatures(path, { data, n, d, labels })
    paths.push(path)
    if (mean === null) mean = new Float64Array(data.length)
    for (let i = 0; i < data.length; i++) mean[i] += data[i]
  }
  inputs.forEach(t => t.dispose())
  if (mean === null) throw new Error('untrained extraction needs at least one seed')
  const averaged = new Float32Array(mean.length)
  for (let i = 0; i < mean.length; i++) averaged[i] = mean[i] / job.seeds.length
  writeFeatures(job.outPath, { data: averaged, n, d, labels })
  paths.push(job.outPath)
  writeFileSync(
    job.outPath + '.meta.json',
    sidecar(job, folder, { mode: 'untrained', init: job.init, seeds: job.seeds }),
  )
  return { paths, n, d, classes: folder.classes, skipped: folder.skipped }
}
