# Surface Lab package: cross-metric surfaces, systoles and pants decompositions
