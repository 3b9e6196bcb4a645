#!/usr/bin/env node
/**
 * extract --model <name|checkpoint> --images <dir> --out <file>
 *         [--untrained --init he-normal --seeds 5 --seed-base 0]
 *         [--resize 224] [--batch 16]
 */

import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { DEFAULT_JOB, extractPretrained, extractUntrained, type ExtractionJob } from './extract.js'
import { INIT_SCHEMES, type InitScheme } from './models.js'

function parseInit(value: string): InitScheme {
  const canonical = value.replace(/-/g, '_') as InitScheme
  if (!INIT_SCHEMES.includes(canonical)) {
    throw new Error(`unknown init scheme ${value}; known: ${INIT_SCHEMES.join(', ')}`)
  }
  return canonical
}

export async function run(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command('extract', 'extract features from an image folder', (y: any) =>
      y
        .option('model', { type: 'string', demandOption: true })
        .option('images', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('untrained', { type: 'boolean', default: false })
        .option('init', { type: 'string', default: 'he-normal' })
        .option('seeds', { type: 'number', default: 5, describe: 'number of untrained seeds' })
        .option('seed-base', { type: 'number', default: 0 })
        .option('resize', { type: 'number', default: 224 })
        .option('batch', { type: 'number', default: 16 }),
    )
    .demandCommand(1)
    .strict()
    .parse(argv)

  const job: ExtractionJob = {
    ...DEFAULT_JOB,
    model: args.model as string,
    imagesDir: args.images as string,
    outPath: args.out as string,
    untrained: Boolean(args.untrained),
    init: parseInit(args.init as string),
    seeds: Array.from({ length: args.seeds as number }, (_, i) => (args['seed-base'] as number) + i),
    resize: [args.resize as number, args.resize as number],
    batchSize: args.batch as number,
  }
  const result = job.untrained ? await extractUntrained(job) : await extractPretrained(job)
  console.log(
    `wrote ${result.paths.length} file(s): n=${result.n} d=${result.d} ` +
      `classes=${result.classes.length} skipped=${result.skipped.length}`,
  )
  return result.skipped.length > 0 ? 1 : 0
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '')
if (invokedDirectly) {
  run(hideBin(process.argv))
    .then(code => process.exit(code))
    .catch(err => {
      console.error(`error: ${err instanceof Error ? err.message : err}`)
      process.exit(2)
    })
}
