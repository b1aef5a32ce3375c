"""trpcalab - t-product tensor algebra and tensor robust PCA laboratory."""

__version__ = "0.1.0"
