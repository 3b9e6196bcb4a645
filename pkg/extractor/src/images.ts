/**
 * Image-folder loading: one subdirectory per class, labels assigned by
 * lexicographic folder order. PNG and JPEG decoding is pure JS; anything
 * unreadable is skipped with a warning and recorded for the sidecar log.
 */

import { readFileSync, readdirSync, statSync } from 'fs'
import { join } from 'path'
import { PNG } from 'pngjs'
import jpeg from 'jpeg-js'

export interface LoadedImage {
  /** RGB pixels in [0, 1], row-major h x w x 3 */
  pixels: Float32Array
  width: number
  height: number
  path: string
  label: number
}

export interface ImageFolder {
  classes: string[]
  images: LoadedImage[]
  skipped: { path: string; reason: string }[]
}

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg'])

function extension(name: string): string {
  const dot = name.lastIndexOf('.')
  return dot < 0 ? '' : name.slice(dot).toLowerCase()
}

function decode(path: string): { data: Uint8Array; width: number; height: number } {
  const raw = readFileSync(path)
  const ext = extension(path)
  if (ext === '.png') {
    const png = PNG.sync.read(raw)
    return { data: png.data, width: png.width, height: png.height }
  }
  const img = jpeg.decode(raw, { useTArray: true, formatAsRGBA: true })
  return { data: img.data, width: img.width, height: img.height }
}

function rgbaToUnitRgb(data: Uint8Array, width: number, height: number): Float32Array {
  const out = new Float32Array(width * height * 3)
  for (let p = 0; p < width * height; p++) {
    out[p * 3] = data[p * 4] / 255
    out[p * 3 + 1] = data[p * 4 + 1] / 255
    out[p * 3 + 2] = data[p * 4 + 2] / 255
  }
  return out
}

export function listClasses(root: string): string[] {
  const classes = readdirSync(root)
    .filter(name => statSync(join(root, name)).isDirectory())
    .sort()
  if (classes.length === 0) {
    throw new Error(`${root}: no class subdirectories`)
  }
  return classes
}

export function loadImageFolder(root: string): ImageFolder {
  const classes = listClasses(root)
  const images: LoadedImage[] = []
  const skipped: { path: string; reason: string }[] = []
  classes.forEach((className, label) => {
    const dir = join(root, className)
    const files = readdirSync(dir)
      .filter(name => IMAGE_EXTENSIONS.has(extension(name)))
      .sort()
    if (files.length === 0) {
      throw new Error(`${dir}: class folder has no images`)
    }
    for (const name of files) {
      const path = join(dir, name)
      try {
        const { data, width, height } = decode(path)
        images.push({ pixels: rgbaToUnitRgb(data, width, height), width, height, path, label })
      } catch (err) {
        const reason = err instanceof Error ? err.message : String(err)
        console.warn(`warning: skipping unreadable image ${path}: ${reason}`)
        skipped.push({ path, reason })
      }
    }
  })
  if (images.length === 0) {
    throw new Error(`${root}: no readable images`)
  }
  return { classes, images, skipped }
}
