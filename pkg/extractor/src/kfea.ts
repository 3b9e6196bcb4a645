/**
 * KFEA feature-file interchange format (little-endian):
 *
 *   "KFEA" | u8 version=1 | u8 dtype (1 = float32) | u16 reserved |
 *   u64 n | u64 d | n*d float32 row-major | u8 hasLabels | [n x u32 labels]
 *
 * This mirrors the scoring toolkit's reader byte for byte; files written
 * here are consumed directly by its `score` / `rank` / `eval` commands.
 */

import { readFileSync, writeFileSync } from 'fs'

export const MAGIC = 'KFEA'
export const VERSION = 1
export const DTYPE_FLOAT32 = 1
const HEADER_BYTES = 4 + 1 + 1 + 2 + 8 + 8

export interface FeatureFile {
  /** row-major n x d activations */
  data: Float32Array
  n: number
  d: number
  labels: Uint32Array | null
}

export function encodeFeatures(file: FeatureFile): Buffer {
  const { data, n, d, labels } = file
  if (data.length !== n * d) {
    throw new Error(`payload length ${data.length} != n*d = ${n * d}`)
  }
  if (labels && labels.length !== n) {
    throw new Error(`labels length ${labels.length} != n = ${n}`)
  }
  for (const v of data) {
    if (!Number.isFinite(v)) throw new Error('non-finite value in feature payload')
  }
  const total = HEADER_BYTES + n * d * 4 + 1 + (labels ? n * 4 : 0)
  const buf = Buffer.alloc(total)
  let off = 0
  buf.write(MAGIC, off, 'ascii'); off += 4
  buf.writeUInt8(VERSION, off); off += 1
  buf.writeUInt8(DTYPE_FLOAT32, off); off += 1
  buf.writeUInt16LE(0, off); off += 2
  buf.writeBigUInt64LE(BigInt(n), off); off += 8
  buf.writeBigUInt64LE(BigInt(d), off); off += 8
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], off); off += 4
  }
  buf.writeUInt8(labels ? 1 : 0, off); off += 1
  if (labels) {
    for (let i = 0; i < n; i++) {
      buf.writeUInt32LE(labels[i], off); off += 4
    }
  }
  return buf
}

export function writeFeatures(path: string, file: FeatureFile): void {
  writeFileSync(path, encodeFeatures(file))
}

export function readFeatures(path: string): FeatureFile {
  const buf = readFileSync(path)
  if (buf.length < HEADER_BYTES + 1) throw new Error(`${path}: shorter than the header`)
  if (buf.toString('ascii', 0, 4) !== MAGIC) throw new Error(`${path}: bad magic`)
  const version = buf.readUInt8(4)
  if (version !== VERSION) throw new Error(`${path}: unsupported version ${version}`)
  const dtype = buf.readUInt8(5)
  if (dtype !== DTYPE_FLOAT32) throw new Error(`${path}: unsupported dtype ${dtype}`)
  const n = Number(buf.readBigUInt64LE(8))
  const d = Number(buf.readBigUInt64LE(16))
  let off = HEADER_BYTES
  const payloadBytes = n * d * 4
  if (off + payloadBytes + 1 > buf.length) throw new Error(`${path}: truncated payload`)
  const data = new Float32Array(n * d)
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(off); off += 4
  }
  const hasLabels = buf.readUInt8(off); off += 1
  let labels: Uint32Array | null = null
  if (hasLabels === 1) {
    if (off + n * 4 > buf.length) throw new Error(`${path}: truncated labels`)
    labels = new Uint32Array(n)
    for (let i = 0; i < n; i++) {
      labels[i] = buf.readUInt32LE(off); off += 4
    }
  } else if (hasLabels !== 0) {
    throw new Error(`${path}: bad hasLabels flag ${hasLabels}`)
  }
  return { data, n, d, labels }
}
