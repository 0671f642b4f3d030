import * as fs from "fs";
import { PNG } from "pngjs";

/**
 * 8-bit grayscale PNG I/O. Reading accepts anything pngjs can decode
 * (it expands to RGBA internally); writing emits true single-channel
 * grayscale so the files match what the preprocessing CLI produces.
 */

export interface GrayImage {
  width: number;
  height: number;
  /** row-major, values 0..255 */
  pixels: Uint8Array;
}

export function readGrayPng(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const pixels = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    // pngjs always hands back RGBA; channel 0 is the gray value for
    // grayscale sources and a fair proxy otherwise.
    pixels[i] = png.data[4 * i];
  }
  return { width: png.width, height: png.height, pixels };
}

export function writeGrayPng(path: string, img: GrayImage): void {
  const png = new PNG({ width: img.width, height: img.height });
  png.data = Buffer.from(img.pixels);
  // the packing options go to write(), not the constructor: one input
  // byte per pixel, grayscale output
  const buf = PNG.sync.write(png, {
    colorType: 0,
    inputColorType: 0,
    bitDepth: 8,
    inputHasAlpha: false,
  });
  fs.writeFileSync(path, buf);
}
